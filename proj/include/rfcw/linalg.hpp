#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rfcw {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Dense 2x2 matrix, row-major. Small enough that everything is by value.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }

    Vec2 operator*(const Vec2& v) const {
        return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
    }
    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Mat2 operator+(const Mat2& o) const {
        return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
    }
    Mat2 operator-(const Mat2& o) const {
        return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
    }
    Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }

    Mat2 transpose() const { return {a11, a21, a12, a22}; }
    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a21; }

    double max_abs() const {
        return std::max(std::max(std::abs(a11), std::abs(a12)),
                        std::max(std::abs(a21), std::abs(a22)));
    }

    bool is_symmetric(double tol = 1e-12) const {
        return std::abs(a12 - a21) <= tol * (1.0 + max_abs());
    }

    Mat2 inverse() const {
        const double d = det();
        if (std::abs(d) < 1e-300 * (1.0 + max_abs() * max_abs())) {
            throw std::runtime_error("Mat2::inverse: singular matrix, det = " +
                                     std::to_string(d));
        }
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }

    /// Real parts of the two eigenvalues, sorted descending.
    std::array<double, 2> eigen_real_parts() const {
        const double tr = trace();
        const double disc = tr * tr - 4.0 * det();
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            return {0.5 * (tr + s), 0.5 * (tr - s)};
        }
        return {0.5 * tr, 0.5 * tr};  // complex pair
    }

    /// Eigenvalues of a symmetric matrix, sorted ascending.
    std::array<double, 2> sym_eigenvalues() const {
        const double tr = trace();
        const double disc = std::max(0.0, tr * tr - 4.0 * det());
        const double s = std::sqrt(disc);
        return {0.5 * (tr - s), 0.5 * (tr + s)};
    }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

}  // namespace rfcw
