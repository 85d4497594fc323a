#pragma once

// Quenched-disorder sampling and exact continuous-time simulation of the
// induced (m_n, q_n) Markov chain, plus the mean-field ODE integrator and the
// fluctuation rescaling used by the moderate-deviation checks.
//
// The chain is simulated directly on the pair of up-spin counts within the
// two field classes; the four transition rates depend on the configuration
// only through (m, q, eta_bar), so no spin array is ever stored.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rfcw/model.hpp"
#include "rfcw/rng.hpp"

namespace rfcw {

struct DisorderSample {
    std::int64_t n = 0;
    std::int64_t n_plus = 0;   ///< number of sites with eta_i = +1
    std::uint64_t seed = 0;

    double eta_bar() const { return static_cast<double>(2 * n_plus - n) / n; }
};

/// Draw n i.i.d. symmetric +-1 fields; eta_bar = (2 Binomial(n,1/2) - n)/n.
/// Bits are consumed 64 per RNG word.
inline DisorderSample sample_disorder(std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_disorder: n must be >= 1");
    CounterRng rng(seed, /*stream=*/0x64697364ULL);
    std::int64_t n_plus = 0;
    std::int64_t remaining = n;
    while (remaining >= 64) {
        n_plus += __builtin_popcountll(rng.next_u64());
        remaining -= 64;
    }
    if (remaining > 0) {
        const std::uint64_t w = rng.next_u64() >> (64 - remaining);
        n_plus += __builtin_popcountll(w);
    }
    return {n, n_plus, seed};
}

/// Exact microscopic state: up-spin counts per field class.
struct ChainState {
    std::int64_t n = 0;
    std::int64_t n_plus = 0;  ///< sites with eta = +1
    std::int64_t up_plus = 0; ///< up spins among the eta = +1 sites
    std::int64_t up_minus = 0;

    std::int64_t n_minus() const { return n - n_plus; }
    double m() const {
        return static_cast<double>(2 * (up_plus + up_minus) - n) / n;
    }
    double q() const {
        return static_cast<double>((2 * up_plus - n_plus) - (2 * up_minus - n_minus())) / n;
    }
    double eta_bar() const { return static_cast<double>(2 * n_plus - n) / n; }

    void validate() const {
        if (up_plus < 0 || up_plus > n_plus || up_minus < 0 || up_minus > n_minus())
            throw std::runtime_error("ChainState outside E_n: spin counts out of range");
    }
};

/// Nearest lattice state in E_n to a requested (m0, q0), given the disorder.
/// Rounding ties are broken toward the centered (zero-magnetization) count.
inline ChainState make_chain_state(const DisorderSample& d, double m0, double q0) {
    ChainState s;
    s.n = d.n;
    s.n_plus = d.n_plus;
    auto place = [](double target_up, std::int64_t n_class) {
        double r = std::floor(target_up + 0.5);
        if (std::abs(target_up + 0.5 - r) < 1e-12 && r > 0.5 * n_class)
            r -= 1.0;  // tie: prefer the count nearer n_class/2
        const double clamped = std::min(std::max(r, 0.0), static_cast<double>(n_class));
        return static_cast<std::int64_t>(clamped);
    };
    // class sums: 2 u_p - n_plus = n (m0 + q0)/2, 2 u_m - n_minus = n (m0 - q0)/2
    s.up_plus = place(0.5 * (0.5 * d.n * (m0 + q0) + d.n_plus), d.n_plus);
    s.up_minus = place(0.5 * (0.5 * d.n * (m0 - q0) + (d.n - d.n_plus)), d.n - d.n_plus);
    return s;
}

/// The four channel rates of the induced generator, in the fixed order
///   (-,-), (-,+), (+,+), (+,-)
/// of jumps (dm, dq) in units of 2/n. Evaluated from macroscopic coordinates;
/// a negative prefactor signals a state outside E_n.
inline std::array<double, 4> jump_rates(const ModelParams& p, std::int64_t n,
                                        double eta_bar, double m, double q) {
    const double ep = std::exp(p.beta * (m + p.B));
    const double em = std::exp(p.beta * (m - p.B));
    std::array<double, 4> pref = {
        0.25 * n * (1.0 + eta_bar + m + q),
        0.25 * n * (1.0 - eta_bar + m - q),
        0.25 * n * (1.0 + eta_bar - m - q),
        0.25 * n * (1.0 - eta_bar - m + q),
    };
    for (double& c : pref) {
        if (c < 0.0) {
            if (c < -1e-9 * n)
                throw std::runtime_error("jump_rates: negative channel rate, state outside E_n");
            c = 0.0;
        }
    }
    return {pref[0] / ep, pref[1] / em, pref[2] * ep, pref[3] * em};
}

inline std::array<double, 4> jump_rates(const ModelParams& p, const ChainState& s) {
    s.validate();
    return jump_rates(p, s.n, s.eta_bar(), s.m(), s.q());
}

/// A time-stamped path of macroscopic states.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec2> states;  ///< (m, q), or (x, y) after rescaling
    bool absorbed = false;     ///< hit a zero-rate corner before t_end

    std::size_t size() const { return times.size(); }
};

struct SimulateOptions {
    /// Number of output grid points over [0, t_end]; 0 records every jump.
    std::int64_t grid_points = 1000;
};

/// Exact sample path of the (m_n, q_n) chain by the race-of-exponentials
/// scheme: exponential holding time at the total rate, categorical channel
/// choice, deterministic jump of +-2/n per coordinate. Jumps are thinned to
/// the output grid with last-jump-before-gridpoint semantics.
///
/// The four exponential weights depend on the state only through m, which
/// moves by +-2/n per event; they are updated multiplicatively and refreshed
/// periodically to keep the accumulated rounding below 1e-12.
inline Trajectory simulate(const ModelParams& p, const DisorderSample& d,
                           ChainState state, double t_end, std::uint64_t seed,
                           const SimulateOptions& opt = {}) {
    p.validate();
    state.validate();
    if (state.n != d.n || state.n_plus != d.n_plus)
        throw std::invalid_argument("simulate: chain state inconsistent with disorder");

    CounterRng rng(seed, 0x73696dul);
    Trajectory traj;
    const bool record_all = opt.grid_points <= 0;
    const std::int64_t grid = record_all ? 0 : opt.grid_points;
    if (!record_all) {
        traj.times.reserve(grid + 1);
        traj.states.reserve(grid + 1);
    }

    const double step_up = std::exp(2.0 * p.beta / state.n);
    const double step_dn = 1.0 / step_up;
    const double two_over_n = 2.0 / state.n;
    double ep = std::exp(p.beta * (state.m() + p.B));  // e^{beta(m+B)}
    double em = std::exp(p.beta * (state.m() - p.B));  // e^{beta(m-B)}

    double t = 0.0;
    std::int64_t next_grid = 0;
    std::int64_t events_since_refresh = 0;
    Vec2 cur{state.m(), state.q()};

    auto emit_until = [&](double now) {
        if (record_all) return;
        while (next_grid <= grid && next_grid * t_end <= now * grid) {
            traj.times.push_back(next_grid * t_end / grid);
            traj.states.push_back(cur);
            ++next_grid;
        }
    };

    if (record_all) {
        traj.times.push_back(0.0);
        traj.states.push_back(cur);
    }

    while (t < t_end) {
        const double r0 = state.up_plus / ep;
        const double r1 = state.up_minus / em;
        const double r2 = (state.n_plus - state.up_plus) * ep;
        const double r3 = (state.n_minus() - state.up_minus) * em;
        const double total = r0 + r1 + r2 + r3;
        if (total <= 0.0) {
            traj.absorbed = true;
            break;
        }
        const double dt = -std::log(rng.next_uniform()) / total;
        const double t_next = t + dt;
        if (t_next >= t_end) {
            t = t_end;
            break;
        }
        emit_until(t_next);
        t = t_next;

        const double u = rng.next_uniform() * total;
        if (u < r0) {
            --state.up_plus;  // (-,-)
            ep *= step_dn;
            em *= step_dn;
            cur.x -= two_over_n;
            cur.y -= two_over_n;
        } else if (u < r0 + r1) {
            --state.up_minus;  // (-,+)
            ep *= step_dn;
            em *= step_dn;
            cur.x -= two_over_n;
            cur.y += two_over_n;
        } else if (u < r0 + r1 + r2) {
            ++state.up_plus;  // (+,+)
            ep *= step_up;
            em *= step_up;
            cur.x += two_over_n;
            cur.y += two_over_n;
        } else {
            ++state.up_minus;  // (+,-)
            ep *= step_up;
            em *= step_up;
            cur.x += two_over_n;
            cur.y -= two_over_n;
        }
        if (record_all) {
            traj.times.push_back(t);
            traj.states.push_back(cur);
        }
        if (++events_since_refresh >= (1 << 20)) {
            cur = {state.m(), state.q()};
            ep = std::exp(p.beta * (cur.x + p.B));
            em = std::exp(p.beta * (cur.x - p.B));
            events_since_refresh = 0;
        }
    }
    if (!record_all) {
        while (next_grid <= grid) {
            traj.times.push_back(next_grid * t_end / grid);
            traj.states.push_back(cur);
            ++next_grid;
        }
    }
    return traj;
}

/// Classical fourth-order integration of the mean-field ODE. The terminal
/// state is cross-checked by repeating the integration at half the step; a
/// mismatch above 1e-6 raises a tolerance error.
inline Trajectory integrate_ode(const ModelParams& p, const MacroState& init,
                                double t_end, double dt) {
    p.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_ode: dt must be positive");
    if (!init.in_domain())
        throw std::invalid_argument("integrate_ode: initial state outside the domain");

    auto rhs = [&p](const Vec2& v) {
        return mean_field_rhs(p, MacroState{v.x, v.y});
    };
    auto run = [&](double step, bool record, Trajectory* out) {
        Vec2 y{init.m, init.q};
        double t = 0.0;
        if (record) {
            out->times.push_back(t);
            out->states.push_back(y);
        }
        while (t < t_end - 1e-15) {
            const double h = std::min(step, t_end - t);
            const Vec2 k1 = rhs(y);
            const Vec2 k2 = rhs(y + 0.5 * h * k1);
            const Vec2 k3 = rhs(y + 0.5 * h * k2);
            const Vec2 k4 = rhs(y + h * k3);
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
            if (record) {
                out->times.push_back(t);
                out->states.push_back(y);
            }
        }
        return y;
    };

    Trajectory traj;
    const Vec2 full = run(dt, true, &traj);
    const Vec2 half = run(0.5 * dt, false, nullptr);
    if ((full - half).norm() > 1e-6)
        throw std::runtime_error(
            "integrate_ode: step-halving check failed; reduce dt");
    return traj;
}

/// Map a trajectory to fluctuation coordinates: state -> b_n (state - center),
/// time compressed by b_n^nu.
inline Trajectory rescale_fluctuations(const Trajectory& traj, const MacroState& center,
                                       double b_n, int nu) {
    if (!(b_n > 0.0)) throw std::invalid_argument("rescale_fluctuations: b_n must be positive");
    if (nu != 0 && nu != 2 && nu != 4)
        throw std::invalid_argument("rescale_fluctuations: nu must be 0, 2 or 4");
    const double tscale = std::pow(b_n, -nu);
    Trajectory out;
    out.absorbed = traj.absorbed;
    out.times.reserve(traj.size());
    out.states.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out.times.push_back(traj.times[i] * tscale);
        out.states.push_back({b_n * (traj.states[i].x - center.m),
                              b_n * (traj.states[i].y - center.q)});
    }
    return out;
}

struct LilCheck {
    double rescaled_disorder = 0.0;  ///< b_n^{nu+1} eta_bar
    double scale_indicator = 0.0;    ///< b_n^{2nu+2} n^{-1} log log n
};

/// Law-of-iterated-logarithm guard: the rescaled disorder average and the
/// growth-condition indicator that must vanish along admissible scalings.
inline LilCheck lil_check(std::int64_t n, double b_n, int nu, double eta_bar) {
    if (n < 3) throw std::invalid_argument("lil_check: n must be >= 3 for log log n");
    LilCheck out;
    out.rescaled_disorder = std::pow(b_n, nu + 1) * eta_bar;
    out.scale_indicator = std::pow(b_n, 2 * nu + 2) / n * std::log(std::log(double(n)));
    return out;
}

}  // namespace rfcw
