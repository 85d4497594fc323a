#pragma once

// Static model mathematics for the random-field Curie-Weiss spin-flip model
// with dichotomous fields eta_i = +/-1: the G-functions and their derivative
// tables, the structural matrices entering the fluctuation Hamiltonians, the
// stationary self-consistency equations, phase classification and the two
// critical curves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfcw/linalg.hpp"

namespace rfcw {

/// Order of the size-dependent perturbations (kappa_n, theta_n) relative to
/// the moderate scale b_n.
enum class ScalingCase { None, BnMinus2, BnMinus4 };

struct ModelParams {
    double beta = 1.0;   ///< inverse temperature, > 0
    double B = 0.0;      ///< field coupling strength, >= 0
    double kappa = 0.0;  ///< amplitude of the beta perturbation
    double theta = 0.0;  ///< amplitude of the B perturbation
    ScalingCase scaling_case = ScalingCase::None;

    void validate() const {
        if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
        if (!(B >= 0.0)) throw std::invalid_argument("B must be nonnegative");
        if (scaling_case == ScalingCase::None && (kappa != 0.0 || theta != 0.0))
            throw std::invalid_argument(
                "kappa and theta require a scaling case other than None");
    }
};

/// A macroscopic point (m, q): empirical magnetization and spin-field
/// alignment. Admissible states satisfy (m+q, m-q) in [-1,1]^2.
struct MacroState {
    double m = 0.0;
    double q = 0.0;

    bool in_domain(double tol = 1e-12) const {
        return std::abs(m + q) <= 1.0 + tol && std::abs(m - q) <= 1.0 + tol;
    }
};

struct GValues {
    double g1_plus = 0.0;
    double g1_minus = 0.0;
    double g2_plus = 0.0;
    double g2_minus = 0.0;
};

/// G1+-(x,y) = cosh[beta(x +- B)] - (x +- y) sinh[beta(x +- B)]
/// G2+-(x,y) = sinh[beta(x +- B)] - (x +- y) cosh[beta(x +- B)]
inline GValues eval_g(const ModelParams& p, const MacroState& s) {
    const double ap = p.beta * (s.m + p.B);
    const double am = p.beta * (s.m - p.B);
    GValues g;
    g.g1_plus = std::cosh(ap) - (s.m + s.q) * std::sinh(ap);
    g.g1_minus = std::cosh(am) - (s.m - s.q) * std::sinh(am);
    g.g2_plus = std::sinh(ap) - (s.m + s.q) * std::cosh(ap);
    g.g2_minus = std::sinh(am) - (s.m - s.q) * std::cosh(am);
    return g;
}

/// Right-hand side of the mean-field evolution:
///   dm/dt = G2+ + G2-,  dq/dt = G2+ - G2-.
inline Vec2 mean_field_rhs(const ModelParams& p, const MacroState& s) {
    const GValues g = eval_g(p, s);
    return {g.g2_plus + g.g2_minus, g.g2_plus - g.g2_minus};
}

/// Lower branch of the critical curve: g1(beta) = arccosh(sqrt(beta))/beta.
/// On it beta = cosh^2(beta * g1(beta)) holds identically.
inline double g1(double beta) {
    if (beta < 1.0) throw std::domain_error("g1 requires beta >= 1");
    return std::acosh(std::sqrt(beta)) / beta;
}

inline constexpr double kBetaTc = 1.5;

/// Field strength at the tri-critical point, (2/3) arccosh(sqrt(3/2)).
inline double tri_critical_B() { return g1(kBetaTc); }

namespace detail {

/// m - (RHS of the 1D self-consistency equation) at field B.
inline double self_consistency_gap(double beta, double B, double m) {
    return m - 0.5 * (std::tanh(beta * (m + B)) + std::tanh(beta * (m - B)));
}

/// All roots of the self-consistency equation on [-1, 1]: sign-change scan on
/// a uniform grid followed by bisection refinement. m = 0 is always a root and
/// is inserted exactly.
inline std::vector<double> self_consistency_roots(double beta, double B,
                                                  int grid_points = 10000) {
    std::vector<double> roots;
    roots.push_back(0.0);
    const double lo = 0.0, hi = 1.0;
    const double dm = (hi - lo) / grid_points;
    // Positive side; mirror negative roots by symmetry of the equation.
    double prev_m = 0.5 * dm;  // skip the known root at 0
    double prev_f = self_consistency_gap(beta, B, prev_m);
    for (int i = 2; i <= 2 * grid_points; ++i) {
        const double m = lo + 0.5 * i * dm;
        const double f = self_consistency_gap(beta, B, m);
        if (prev_f == 0.0) {
            roots.push_back(prev_m);
        } else if (prev_f * f < 0.0) {
            double a = prev_m, b = m, fa = prev_f;
            for (int it = 0; it < 100 && b - a > 1e-13; ++it) {
                const double c = 0.5 * (a + b);
                const double fc = self_consistency_gap(beta, B, c);
                if (fa * fc <= 0.0) {
                    b = c;
                } else {
                    a = c;
                    fa = fc;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_m = m;
        prev_f = f;
    }
    const size_t n_pos = roots.size();
    for (size_t i = 1; i < n_pos; ++i) roots.push_back(-roots[i]);
    std::sort(roots.begin(), roots.end());
    return roots;
}

inline bool has_ferromagnetic_root(double beta, double B) {
    const auto roots = self_consistency_roots(beta, B);
    for (double r : roots)
        if (std::abs(r) > 1e-9) return true;
    return false;
}

}  // namespace detail

/// Upper critical curve: the supremum of B for which ferromagnetic solutions
/// of the self-consistency equation exist. Coincides with g1 on (1, 3/2];
/// located numerically by bisection over B above the tri-critical point.
inline double g2(double beta) {
    if (beta <= 1.0) throw std::domain_error("g2 requires beta > 1");
    if (beta <= kBetaTc) return g1(beta);
    double lo = g1(beta);  // ferromagnetic roots exist here (region II(iii))
    double hi = 1.0;
    while (detail::has_ferromagnetic_root(beta, hi)) hi += 0.5;
    for (int it = 0; it < 90 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (detail::has_ferromagnetic_root(beta, mid))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Resolve one of the symbolic field values accepted at the interfaces.
inline double resolve_field(const std::string& name, double beta) {
    if (name == "g1") return g1(beta);
    if (name == "g2") return g2(beta);
    if (name == "tc") return tri_critical_B();
    throw std::invalid_argument("unknown symbolic field value '" + name + "'");
}

// --- structural matrices ---------------------------------------------------

struct StructMatrices {
    Mat2 G1mat;  ///< matrix of G1+ +- G1- combinations (symmetric)
    Mat2 G1hat;  ///< same first column, zero second column
    Mat2 Bmat;   ///< hyperbolic matrix of (beta m, beta B) (symmetric)
};

inline StructMatrices struct_matrices(const ModelParams& p, const MacroState& s) {
    const GValues g = eval_g(p, s);
    const double sum1 = g.g1_plus + g.g1_minus;
    const double dif1 = g.g1_plus - g.g1_minus;
    StructMatrices out;
    out.G1mat = {sum1, dif1, dif1, sum1};
    out.G1hat = {sum1, 0.0, dif1, 0.0};
    const double cm = std::cosh(p.beta * s.m), sm = std::sinh(p.beta * s.m);
    const double cB = std::cosh(p.beta * p.B), sB = std::sinh(p.beta * p.B);
    out.Bmat = {cm * cB, sm * sB, sm * sB, cm * cB};
    return out;
}

// --- derivative tables for D^k G_2 -----------------------------------------

enum class StationaryCase { Generic, Stationary, Paramagnetic, CriticalCurve, TriCritical };

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

inline void check_case(const ModelParams& p, const MacroState& s, StationaryCase c) {
    const double tol = 1e-8;
    switch (c) {
        case StationaryCase::Generic:
            break;
        case StationaryCase::Stationary: {
            const Vec2 r = mean_field_rhs(p, s);
            require(std::abs(r.x) < tol && std::abs(r.y) < tol,
                    "state is not stationary: mean-field right-hand side nonzero");
            break;
        }
        case StationaryCase::Paramagnetic:
            require(std::abs(s.m) < tol && std::abs(s.q - std::tanh(p.beta * p.B)) < tol,
                    "state is not the paramagnetic point (0, tanh(beta B))");
            break;
        case StationaryCase::CriticalCurve:
            check_case(p, s, StationaryCase::Paramagnetic);
            require(std::abs(p.beta - std::pow(std::cosh(p.beta * p.B), 2)) < tol,
                    "parameters violate the critical-curve identity beta = cosh^2(beta B)");
            break;
        case StationaryCase::TriCritical:
            check_case(p, s, StationaryCase::CriticalCurve);
            require(std::abs(p.beta - kBetaTc) < tol && std::abs(p.B - tri_critical_B()) < tol,
                    "parameters are not the tri-critical point");
            break;
    }
}

}  // namespace detail

/// Matrix of k-th order Taylor coefficients of (G2+ + G2-, G2+ - G2-) around
/// (m, q): first column is d^k/dx^k, second column d^k/dx^{k-1}dy. The
/// stationary/paramagnetic/critical-curve branches apply the corresponding
/// simplifications; Generic evaluates the full derivative formulas.
inline Mat2 d_k_g2(const ModelParams& p, const MacroState& s, int k,
                   StationaryCase c = StationaryCase::Generic) {
    detail::require(k >= 1 && k <= 5, "derivative order k must lie in 1..5");
    detail::check_case(p, s, c);

    const double beta = p.beta;
    const double cm = std::cosh(beta * s.m), sm = std::sinh(beta * s.m);
    const double cB = std::cosh(beta * p.B), sB = std::sinh(beta * p.B);
    const double bk = std::pow(beta, k);
    const double bk1 = std::pow(beta, k - 1);
    const bool even = (k % 2 == 0);

    if (c == StationaryCase::CriticalCurve || c == StationaryCase::TriCritical) {
        if (even) return -2.0 * bk1 * sB * Mat2{0.0, 1.0, double(k), 0.0};
        return -2.0 * bk1 * cB * Mat2::diag(k - 1.0, 1.0);
    }
    if (c == StationaryCase::Paramagnetic) {
        if (even) return -2.0 * bk1 * sB * Mat2{0.0, 1.0, double(k), 0.0};
        return (2.0 * bk / cB) * Mat2{1.0, 0.0, 0.0, 0.0} -
               2.0 * bk1 * cB * Mat2::diag(double(k), 1.0);
    }

    // Generic and Stationary share the second (hyperbolic) part; the leading
    // G-part carries G2 for even k and G1 for odd k, and the even-k G2 part
    // vanishes at stationary points.
    const GValues g = eval_g(p, s);
    Mat2 lead{};
    if (even) {
        if (c == StationaryCase::Generic) {
            lead = {bk * (g.g2_plus + g.g2_minus), 0.0, bk * (g.g2_plus - g.g2_minus), 0.0};
        }
        const Mat2 hyp{double(k) * sm * cB, cm * sB, double(k) * cm * sB, sm * cB};
        return lead - 2.0 * bk1 * hyp;
    }
    lead = {bk * (g.g1_plus + g.g1_minus), 0.0, bk * (g.g1_plus - g.g1_minus), 0.0};
    const Mat2 hyp{double(k) * cm * cB, sm * sB, double(k) * sm * sB, cm * cB};
    return lead - 2.0 * bk1 * hyp;
}

// --- fixed points and phase classification ----------------------------------

enum class Stability { Stable, Unstable, Neutral };

enum class PhaseRegion {
    Para_I,         ///< beta <= 1, unique globally stable paramagnetic point
    Para_IIi,       ///< beta > 1, B >= g2: same picture as region I
    Ferro_IIii,     ///< beta > 1, B < g1: two symmetric stable ferromagnetic points
    Boundary_IIiii, ///< beta > 3/2, B = g1: neutral paramagnet + stable ferro pair
    Mixed_IIiv,     ///< beta > 3/2, g1 < B < g2: five fixed points
    CriticalCurve,  ///< 1 < beta <= 3/2, B = g1(beta)
    TriCritical     ///< (beta, B) = (3/2, (2/3) arccosh(sqrt(3/2)))
};

inline std::string to_string(PhaseRegion r) {
    switch (r) {
        case PhaseRegion::Para_I: return "Para_I";
        case PhaseRegion::Para_IIi: return "Para_IIi";
        case PhaseRegion::Ferro_IIii: return "Ferro_IIii";
        case PhaseRegion::Boundary_IIiii: return "Boundary_IIiii";
        case PhaseRegion::Mixed_IIiv: return "Mixed_IIiv";
        case PhaseRegion::CriticalCurve: return "CriticalCurve";
        case PhaseRegion::TriCritical: return "TriCritical";
    }
    return "?";
}

inline std::string to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "Stable";
        case Stability::Unstable: return "Unstable";
        case Stability::Neutral: return "Neutral";
    }
    return "?";
}

struct FixedPoint {
    MacroState state;
    Stability stability = Stability::Stable;
    double leading_eigenvalue = 0.0;  ///< largest real part of the Jacobian spectrum
    double residual = 0.0;            ///< norm of the stationarity residual
};

struct PhaseReport {
    PhaseRegion region = PhaseRegion::Para_I;
    std::vector<FixedPoint> fixed_points;
};

/// Jacobian of mean_field_rhs at (m, q); equals the k = 1 derivative matrix.
inline Mat2 mean_field_jacobian(const ModelParams& p, const MacroState& s) {
    return d_k_g2(p, s, 1, StationaryCase::Generic);
}

inline PhaseRegion classify_region(const ModelParams& p, double curve_tol = 1e-10) {
    if (p.beta <= 1.0) return PhaseRegion::Para_I;
    const double b1 = g1(p.beta);
    if (std::abs(p.beta - kBetaTc) <= curve_tol && std::abs(p.B - tri_critical_B()) <= curve_tol)
        return PhaseRegion::TriCritical;
    if (std::abs(p.B - b1) <= curve_tol)
        return p.beta <= kBetaTc ? PhaseRegion::CriticalCurve : PhaseRegion::Boundary_IIiii;
    if (p.B < b1) return PhaseRegion::Ferro_IIii;
    if (p.beta <= kBetaTc) return PhaseRegion::Para_IIi;  // g1 = g2 here
    const double b2 = g2(p.beta);
    return p.B < b2 ? PhaseRegion::Mixed_IIiv : PhaseRegion::Para_IIi;
}

/// Solve the stationary equations, label stability from the Jacobian spectrum
/// and classify the phase region. Eigenvalues within +-1e-8 of zero are
/// reported Neutral.
inline PhaseReport stationary_points(const ModelParams& p) {
    p.validate();
    PhaseReport rep;
    rep.region = classify_region(p);
    const auto ms = detail::self_consistency_roots(p.beta, p.B);
    for (double m : ms) {
        MacroState s;
        s.m = m;
        s.q = 0.5 * (std::tanh(p.beta * (m + p.B)) - std::tanh(p.beta * (m - p.B)));
        FixedPoint fp;
        fp.state = s;
        const Vec2 r = mean_field_rhs(p, s);
        fp.residual = r.norm();
        const auto ev = mean_field_jacobian(p, s).eigen_real_parts();
        fp.leading_eigenvalue = ev[0];
        if (std::abs(ev[0]) <= 1e-8)
            fp.stability = Stability::Neutral;
        else
            fp.stability = ev[0] < 0.0 ? Stability::Stable : Stability::Unstable;
        rep.fixed_points.push_back(fp);
    }
    return rep;
}

}  // namespace rfcw
