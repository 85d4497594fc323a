#pragma once

// Symbolic perturbation engine: the term algebra on expressions of the form
// sum c x^a y^b psi^(d)(x), the Q operator families acting on it, the kernel
// projections P and P0, the layer recursion psi[r]/phi[r] that averages out
// the fast coordinate, and the closed-form composition sum conjectured for
// the projected drift.
//
// Coefficients are concrete reals: operators are instantiated at numerical
// model parameters, the formal symbol psi is never expanded.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfcw/model.hpp"

namespace rfcw {
namespace opcalc {

/// One term c * x^xpow * y^ypow * psi^(dpsi)(x).
struct VTerm {
    double coeff = 0.0;
    int xpow = 0;
    int ypow = 0;
    int dpsi = 0;

    friend bool operator==(const VTerm&, const VTerm&) = default;
};

inline bool term_order(const VTerm& a, const VTerm& b) {
    if (a.ypow != b.ypow) return a.ypow < b.ypow;
    if (a.xpow != b.xpow) return a.xpow < b.xpow;
    return a.dpsi < b.dpsi;
}

/// Finite sum of VTerms in canonical order with like terms merged. Terms with
/// |coeff| <= 1e-14 * (largest coefficient) are dropped, so exact algebraic
/// cancellations collapse to the empty expression.
class VExpression {
public:
    VExpression() = default;
    explicit VExpression(std::vector<VTerm> terms) : terms_(std::move(terms)) {
        normalize();
    }

    /// The formal seed psi(x).
    static VExpression psi() { return VExpression({VTerm{1.0, 0, 0, 0}}); }

    const std::vector<VTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    VExpression operator+(const VExpression& o) const {
        std::vector<VTerm> all = terms_;
        all.insert(all.end(), o.terms_.begin(), o.terms_.end());
        return VExpression(std::move(all));
    }
    VExpression operator-(const VExpression& o) const { return *this + o * -1.0; }
    VExpression operator*(double s) const {
        std::vector<VTerm> all = terms_;
        for (auto& t : all) t.coeff *= s;
        return VExpression(std::move(all));
    }

    int max_ypow() const {
        int m = 0;
        for (const auto& t : terms_) m = std::max(m, t.ypow);
        return m;
    }

    /// Coefficient of the term x^xpow y^ypow psi^(dpsi); 0 when absent.
    double coeff(int xpow, int ypow, int dpsi) const {
        for (const auto& t : terms_)
            if (t.xpow == xpow && t.ypow == ypow && t.dpsi == dpsi) return t.coeff;
        return 0.0;
    }

    /// Numerical value given a point and the derivative values of psi at x.
    double evaluate(double x, double y, const std::vector<double>& psi_derivs) const {
        double acc = 0.0;
        for (const auto& t : terms_) {
            if (t.dpsi >= static_cast<int>(psi_derivs.size()))
                throw std::invalid_argument("VExpression::evaluate: missing psi derivative");
            acc += t.coeff * std::pow(x, t.xpow) * std::pow(y, t.ypow) * psi_derivs[t.dpsi];
        }
        return acc;
    }

    bool near(const VExpression& o, double tol = 1e-10) const {
        const VExpression diff = *this - o;
        double scale = 0.0;
        for (const auto& t : terms_) scale = std::max(scale, std::abs(t.coeff));
        for (const auto& t : o.terms_) scale = std::max(scale, std::abs(t.coeff));
        for (const auto& t : diff.terms_)
            if (std::abs(t.coeff) > tol * std::max(1.0, scale)) return false;
        return true;
    }

    friend bool operator==(const VExpression& a, const VExpression& b) {
        return a.terms_ == b.terms_;
    }

private:
    void normalize() {
        std::sort(terms_.begin(), terms_.end(), term_order);
        std::vector<VTerm> merged;
        for (const auto& t : terms_) {
            if (!merged.empty() && merged.back().xpow == t.xpow &&
                merged.back().ypow == t.ypow && merged.back().dpsi == t.dpsi) {
                merged.back().coeff += t.coeff;
            } else {
                merged.push_back(t);
            }
        }
        double scale = 0.0;
        for (const auto& t : merged) scale = std::max(scale, std::abs(t.coeff));
        terms_.clear();
        for (const auto& t : merged)
            if (std::abs(t.coeff) > 1e-14 * scale && t.coeff != 0.0) terms_.push_back(t);
    }

    std::vector<VTerm> terms_;
};

/// d/dx on a term: power rule on x plus promotion of psi^(d) to psi^(d+1).
inline VExpression ddx(const VExpression& e) {
    std::vector<VTerm> out;
    for (const auto& t : e.terms()) {
        if (t.xpow > 0) out.push_back({t.coeff * t.xpow, t.xpow - 1, t.ypow, t.dpsi});
        out.push_back({t.coeff, t.xpow, t.ypow, t.dpsi + 1});
    }
    return VExpression(std::move(out));
}

inline VExpression ddy(const VExpression& e) {
    std::vector<VTerm> out;
    for (const auto& t : e.terms())
        if (t.ypow > 0) out.push_back({t.coeff * t.ypow, t.xpow, t.ypow - 1, t.dpsi});
    return VExpression(std::move(out));
}

inline VExpression mul_monomial(const VExpression& e, double c, int dx, int dy) {
    std::vector<VTerm> out;
    for (const auto& t : e.terms())
        out.push_back({t.coeff * c, t.xpow + dx, t.ypow + dy, t.dpsi});
    return VExpression(std::move(out));
}

// --- operators ---------------------------------------------------------------

/// The superscript of a Q operator. Plus/Minus act with even monomial degree
/// and move between the y-grades; Zero/One act with odd degree and preserve
/// the grade. One has the pure-x subspace as kernel.
enum class OpKind { Plus, Minus, Zero, One };

inline std::string to_string(OpKind k) {
    switch (k) {
        case OpKind::Plus: return "+";
        case OpKind::Minus: return "-";
        case OpKind::Zero: return "0";
        case OpKind::One: return "1";
    }
    return "?";
}

/// Q_{k,m}^z[a]: k is the b_n-order slot, m <= k the monomial degree (m = k
/// throughout the standard calculus), a the scalar coefficient.
struct OperatorSpec {
    OpKind kind = OpKind::Zero;
    int k = 1;
    int m = 1;
    double a = 0.0;

    void validate() const {
        if (k < 1 || m < 1 || m > k)
            throw std::invalid_argument("OperatorSpec: require 1 <= m <= k");
        const bool even = (m % 2 == 0);
        if ((kind == OpKind::Plus || kind == OpKind::Minus) && !even)
            throw std::invalid_argument("OperatorSpec: +/- operators need even m");
        if ((kind == OpKind::Zero || kind == OpKind::One) && even)
            throw std::invalid_argument("OperatorSpec: 0/1 operators need odd m");
        if (kind == OpKind::Zero && k == 1 && m == 1 && a != 0.0)
            throw std::invalid_argument("OperatorSpec: a_{1,1}^0 must vanish");
    }
};

/// Apply one operator:
///   Plus:  a x^{m-1} y d/dx,   Minus: a x^m d/dy,
///   Zero:  a x^m d/dx,         One:   a x^{m-1} y d/dy.
inline VExpression apply_operator(const OperatorSpec& op, const VExpression& e) {
    op.validate();
    switch (op.kind) {
        case OpKind::Plus: return mul_monomial(ddx(e), op.a, op.m - 1, 1);
        case OpKind::Minus: return mul_monomial(ddy(e), op.a, op.m, 0);
        case OpKind::Zero: return mul_monomial(ddx(e), op.a, op.m, 0);
        case OpKind::One: return mul_monomial(ddy(e), op.a, op.m - 1, 1);
    }
    return {};
}

using OperatorSet = std::vector<OperatorSpec>;

inline double find_a11(const OperatorSet& ops) {
    for (const auto& op : ops)
        if (op.kind == OpKind::One && op.k == 1 && op.m == 1) return op.a;
    return 0.0;
}

inline const OperatorSpec* find_op(const OperatorSet& ops, OpKind kind, int k, int m) {
    for (const auto& op : ops)
        if (op.kind == kind && op.k == k && op.m == m) return &op;
    return nullptr;
}

/// P: drop the pure-x component and scale the y^b component by -1/(b a11).
/// By construction e + Q_1^1[a11] P(e) = P0(e).
inline VExpression project_P(const VExpression& e, double a11) {
    if (a11 == 0.0)
        throw std::runtime_error(
            "project_P: singular projection, the Q_1^1 coefficient vanishes");
    std::vector<VTerm> out;
    for (const auto& t : e.terms()) {
        if (t.ypow == 0) continue;
        out.push_back({-t.coeff / (t.ypow * a11), t.xpow, t.ypow, t.dpsi});
    }
    return VExpression(std::move(out));
}

/// P0: the pure-x component.
inline VExpression project_P0(const VExpression& e) {
    std::vector<VTerm> out;
    for (const auto& t : e.terms())
        if (t.ypow == 0) out.push_back(t);
    return VExpression(std::move(out));
}

// --- model operator sets -----------------------------------------------------

/// The nine operators of the fixed-parameter calculus at the paramagnetic
/// point, for parameters on the critical curve beta = cosh^2(beta B).
inline OperatorSet build_standard_Q(const ModelParams& p) {
    const double c = std::cosh(p.beta * p.B);
    const double s = std::sinh(p.beta * p.B);
    const double b = p.beta;
    return {
        {OpKind::One, 1, 1, -2.0 * c},
        {OpKind::Plus, 2, 2, -2.0 * b * s},
        {OpKind::Minus, 2, 2, -2.0 * b * s},
        {OpKind::Zero, 3, 3, -(2.0 / 3.0) * b * b * c},
        {OpKind::One, 3, 3, -b * b * c},
        {OpKind::Plus, 4, 4, -(1.0 / 3.0) * b * b * b * s},
        {OpKind::Minus, 4, 4, -(1.0 / 3.0) * b * b * b * s},
        {OpKind::Zero, 5, 5, -(1.0 / 15.0) * b * b * b * b * c},
        {OpKind::One, 5, 5, -(1.0 / 12.0) * b * b * b * b * c},
    };
}

/// Linear response of the paramagnetic x-drift coefficient to (kappa, theta):
///   2 (1 - 2 beta B tanh(beta B)) / cosh(beta B) * kappa
///   - 4 beta sinh(beta B) * theta,
/// valid on the critical curve.
inline double linear_response_coefficient(const ModelParams& p) {
    const double c = std::cosh(p.beta * p.B);
    const double s = std::sinh(p.beta * p.B);
    return 2.0 / c * (1.0 - 2.0 * p.beta * p.B * s / c) * p.kappa -
           4.0 * p.beta * s * p.theta;
}

/// Operators contributed by the size-dependent parameter perturbations.
///
/// For kappa_n, theta_n of order b_n^{-2}: Q_{3,1}^{0,1}, Q_{4,2}^{+,-},
/// Q_{5,3}^0 and Q_{5,1}^0. When the perturbed parameters are constrained to
/// the critical curve (beta_n = cosh^2(beta_n B_n) for all n), the pure-x
/// linear responses vanish: Q_{3,1}^0 = Q_{5,1}^0 = 0.
///
/// For kappa_n, theta_n of order b_n^{-4}: only Q_{5,1}^0 appears, carrying
/// the first-order linear response.
inline OperatorSet build_extended_Q(const ModelParams& p,
                                    bool critical_curve_constraint = false) {
    if (p.scaling_case == ScalingCase::None)
        throw std::invalid_argument("build_extended_Q requires a scaling case");
    const double c = std::cosh(p.beta * p.B);
    const double s = std::sinh(p.beta * p.B);
    const double b = p.beta;
    const double k = p.kappa, th = p.theta;

    if (p.scaling_case == ScalingCase::BnMinus4)
        return {{OpKind::Zero, 5, 1, linear_response_coefficient(p)}};

    const double a31_0 = critical_curve_constraint ? 0.0 : linear_response_coefficient(p);
    const double a31_1 = -2.0 * s * (p.B * k + b * th);
    const double a42 = -2.0 * ((s + b * p.B * c) * k + b * b * c * th);
    const double a53_0 = -(2.0 / 3.0) * (b * (2.0 * c + b * p.B * s) * k + b * b * b * s * th);
    // The second-order x-linear response entering the k = 5 slot is only
    // defined on-curve, where it vanishes; off-curve it sits beyond every
    // admissible order for nu = 2 runs.
    const double a51_0 = 0.0;
    return {
        {OpKind::Zero, 3, 1, a31_0},
        {OpKind::One, 3, 1, a31_1},
        {OpKind::Plus, 4, 2, a42},
        {OpKind::Minus, 4, 2, a42},
        {OpKind::Zero, 5, 3, a53_0},
        {OpKind::Zero, 5, 1, a51_0},
    };
}

// --- the recursion -----------------------------------------------------------

struct PerturbationResult {
    std::vector<VExpression> psi_layers;    ///< psi[0..nu]
    std::vector<VExpression> phi_layers;    ///< phi[1..nu]
    std::vector<VExpression> p0_phi_layers; ///< P0 phi[1..nu]
    std::map<int, double> drift_poly;       ///< x-power -> coefficient of x^p psi'
    std::vector<VTerm> non_drift_terms;     ///< P0 phi[nu] terms with dpsi != 1

    const VExpression& phi(int r) const { return phi_layers.at(r - 1); }
    const VExpression& p0_phi(int r) const { return p0_phi_layers.at(r - 1); }
};

/// Apply the full slot-k operator sum.
inline VExpression apply_slot(const OperatorSet& ops, int k, const VExpression& e) {
    VExpression acc;
    for (const auto& op : ops)
        if (op.k == k) acc = acc + apply_operator(op, e);
    return acc;
}

/// Run the layer recursion
///   phi[r] = sum_{l=0}^{r-1} Q_{r+1-l} psi[l],   psi[r] = P(phi[r])
/// up to r = nu, starting from the formal seed (or a caller-provided one).
/// The drift polynomial collects the x-powers of P0 phi[nu] acting on psi'.
inline PerturbationResult perturb(const OperatorSet& ops, int nu,
                                  const VExpression& seed = VExpression::psi()) {
    if (nu != 2 && nu != 4) throw std::invalid_argument("perturb: nu must be 2 or 4");
    for (const auto& op : ops) op.validate();
    const double a11 = find_a11(ops);
    if (a11 == 0.0)
        throw std::runtime_error("perturb: operator set lacks a nonzero Q_1^1 entry");

    PerturbationResult res;
    res.psi_layers.push_back(seed);
    for (int r = 1; r <= nu; ++r) {
        VExpression phi;
        for (int l = 0; l <= r - 1; ++l)
            phi = phi + apply_slot(ops, r + 1 - l, res.psi_layers[l]);
        res.phi_layers.push_back(phi);
        res.p0_phi_layers.push_back(project_P0(phi));
        res.psi_layers.push_back(project_P(phi, a11));
    }
    for (const auto& t : res.p0_phi_layers.back().terms()) {
        if (t.dpsi == 1)
            res.drift_poly[t.xpow] += t.coeff;
        else
            res.non_drift_terms.push_back(t);
    }
    return res;
}

// --- operator combination checks ----------------------------------------------

struct ComboCheck {
    double pair_engine = 0.0;    ///< x^{k+j-1} psi' coefficient of Q_k^- P Q_j^+ psi
    double pair_closed = 0.0;    ///< -a_k^- a_j^+ / a11
    double triple_engine = 0.0;  ///< x^5 psi' coefficient of Q_2^- P Q_3^1 P Q_2^+ psi
    double triple_closed = 0.0;  ///< a_2^- a_3^1 a_2^+ / a11^2
};

inline ComboCheck combo_check(const OperatorSet& ops, int j, int k) {
    const double a11 = find_a11(ops);
    const OperatorSpec* plus = find_op(ops, OpKind::Plus, j, j);
    const OperatorSpec* minus = find_op(ops, OpKind::Minus, k, k);
    if (a11 == 0.0 || plus == nullptr || minus == nullptr)
        throw std::invalid_argument("combo_check: required operators absent");

    ComboCheck out;
    const VExpression psi = VExpression::psi();
    const VExpression pair =
        apply_operator(*minus, project_P(apply_operator(*plus, psi), a11));
    out.pair_engine = pair.coeff(k + j - 1, 0, 1);
    out.pair_closed = -minus->a * plus->a / a11;

    const OperatorSpec* q2p = find_op(ops, OpKind::Plus, 2, 2);
    const OperatorSpec* q2m = find_op(ops, OpKind::Minus, 2, 2);
    const OperatorSpec* q31 = find_op(ops, OpKind::One, 3, 3);
    if (q2p && q2m && q31) {
        const VExpression triple = apply_operator(
            *q2m, project_P(apply_operator(*q31, project_P(apply_operator(*q2p, psi), a11)),
                            a11));
        out.triple_engine = triple.coeff(5, 0, 1);
        out.triple_closed = q2m->a * q31->a * q2p->a / (a11 * a11);
    }
    return out;
}

// --- conjectured closed form ---------------------------------------------------

namespace detail {

inline double slot_coeff(const OperatorSet& ops, OpKind kind, int k) {
    const OperatorSpec* op = find_op(ops, kind, k, k);
    return op ? op->a : 0.0;
}

/// Depth-first enumeration of compositions i_1 + ... + i_n = nu + n with even
/// endpoints and odd interior indices >= 3, accumulating the alternating
/// products a^-_{i_1} (prod a^1_{i_j}) a^+_{i_n} / a11^{n-1}. `remaining` is
/// the value the closing index must take if the chain ends now; it gains one
/// per interior element because the target grows with the chain length.
inline void composition_sum(const OperatorSet& ops, double a11, int remaining,
                            int depth, double partial, double& acc) {
    if (remaining >= 2 && remaining % 2 == 0) {
        const double ap = slot_coeff(ops, OpKind::Plus, remaining);
        if (ap != 0.0) {
            const int n = depth + 1;
            const double sign = (n % 2 == 0) ? -1.0 : 1.0;
            acc += sign * partial * ap / std::pow(a11, n - 1);
        }
    }
    for (int i = 3; i + 1 <= remaining; i += 2) {
        const double a1 = slot_coeff(ops, OpKind::One, i);
        if (a1 != 0.0)
            composition_sum(ops, a11, remaining - i + 1, depth + 1, partial * a1, acc);
    }
}

}  // namespace detail

/// Closed-form composition sum for the projected drift coefficient on x^{nu+1},
/// valid under the hypothesis that every intermediate even projection
/// vanishes (verified by running the recursion first):
///
///   a_{nu+1}^0 + sum_{n >= 2} sum_{i_1+...+i_n = nu+n} (-1)^{n-1}
///       a_{i_1}^- (prod_j a_{i_j}^1) a_{i_n}^+ / a11^{n-1},
///
/// with i_1, i_n even and the interior indices odd and != 1.
inline double conjecture_drift(const OperatorSet& ops, int nu) {
    if (nu != 2 && nu != 4)
        throw std::invalid_argument("conjecture_drift: nu must be 2 or 4");
    const PerturbationResult rec = perturb(ops, nu);
    for (int l = 2; l < nu; l += 2) {
        if (!rec.p0_phi(l).empty())
            throw std::invalid_argument(
                "conjecture_drift: hypothesis violated, P0 phi[" + std::to_string(l) +
                "] does not vanish");
    }
    const double a11 = find_a11(ops);
    double acc = detail::slot_coeff(ops, OpKind::Zero, nu + 1);
    for (int i1 = 2; i1 <= nu; i1 += 2) {
        const double am = detail::slot_coeff(ops, OpKind::Minus, i1);
        if (am != 0.0)
            detail::composition_sum(ops, a11, nu + 2 - i1, 1, am, acc);
    }
    return acc;
}

/// Extended composition sum over pairs (i_j, r_j): slot indices i summing to
/// nu + n, monomial degrees r_j <= i_j summing to mu + n with even endpoints
/// and odd interior degrees. Returns the map x-power -> coefficient, matching
/// the recursion whenever the same-parity assumption and the vanishing
/// hypothesis hold.
inline std::map<int, double> conjecture_drift_extended(const OperatorSet& ops, int nu) {
    if (nu != 2 && nu != 4)
        throw std::invalid_argument("conjecture_drift_extended: nu must be 2 or 4");
    const PerturbationResult rec = perturb(ops, nu);
    for (int l = 2; l < nu; l += 2)
        if (!rec.p0_phi(l).empty())
            throw std::invalid_argument(
                "conjecture_drift_extended: hypothesis violated at layer " + std::to_string(l));
    const double a11 = find_a11(ops);
    if (a11 == 0.0) throw std::runtime_error("conjecture_drift_extended: missing Q_1^1");

    std::map<int, double> drift;
    for (const auto& op : ops)
        if (op.kind == OpKind::Zero && op.k == nu + 1) drift[op.m] += op.a;

    // chains: (-, 1, 1, ..., 1, +) over (i, r) pairs
    struct Frame {
        int i_used, r_used, depth;
        double partial;
    };
    std::vector<Frame> stack;
    for (const auto& first : ops) {
        if (first.kind != OpKind::Minus) continue;
        stack.push_back({first.k, first.m, 1, first.a});
        while (!stack.empty()) {
            const Frame f = stack.back();
            stack.pop_back();
            for (const auto& next : ops) {
                const int i_tot = f.i_used + next.k;
                const int r_tot = f.r_used + next.m;
                if (next.kind == OpKind::Plus) {
                    if (i_tot - (f.depth + 1) != nu) continue;
                    const int n = f.depth + 1;
                    const int mu = r_tot - n;
                    if (mu < 0) continue;
                    const double sign = (n % 2 == 0) ? -1.0 : 1.0;
                    drift[mu + 1] +=
                        sign * f.partial * next.a / std::pow(a11, n - 1);
                } else if (next.kind == OpKind::One && !(next.k == 1 && next.m == 1)) {
                    if (i_tot - (f.depth + 1) >= nu) continue;  // room for the closing +
                    stack.push_back({i_tot, r_tot, f.depth + 1, f.partial * next.a});
                }
            }
        }
    }
    for (auto it = drift.begin(); it != drift.end();) {
        if (it->second == 0.0)
            it = drift.erase(it);
        else
            ++it;
    }
    return drift;
}

}  // namespace opcalc
}  // namespace rfcw
