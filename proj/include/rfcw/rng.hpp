#pragma once

// Counter-based pseudo-random generator (SplitMix64 output function applied
// to a Weyl counter), with independent streams derived by hashing a
// (seed, stream) pair. Replicas own disjoint streams, so ensemble runs are
// reproducible regardless of thread scheduling.

#include <cmath>
#include <cstdint>

namespace rfcw {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

class CounterRng {
public:
    CounterRng() : CounterRng(0, 0) {}
    CounterRng(std::uint64_t seed, std::uint64_t stream) {
        // Two mixing rounds decorrelate (seed, stream) pairs.
        state_ = detail::splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
        state_ = detail::splitmix64(state_ + detail::splitmix64(stream));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in (0, 1]: 53 random bits, never returns 0.
    double next_uniform() {
        const std::uint64_t bits = next_u64() >> 11;
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    /// Exponential holding time with the given rate.
    double next_exponential(double rate) { return -std::log(next_uniform()) / rate; }

    /// Standard normal via Box-Muller (used only in test utilities).
    double next_normal() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace rfcw
