#pragma once

// Seedable random streams. Every stochastic operation in the library takes an
// explicit stream; replicate runs and parallel chains use streams derived
// from a master seed with derive_seed, so results are reproducible regardless
// of scheduling.

#include <cmath>
#include <cstdint>
#include <random>

namespace raresim {

// SplitMix64 step; also used to mix tags into derived seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic child seed for (master, tag). Chained calls derive
// per-replicate, per-level and per-chain streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    std::uint64_t s = master ^ (0x6a09e667f3bcc909ull + tag * 0x9e3779b97f4a7c15ull);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0,1) with 53 random bits.
    double u01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the paired draw is cached.
    double normal() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        double u1 = u01();
        while (u1 <= 0.0) u1 = u01();
        const double u2 = u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cache_ = r * std::sin(a);
        has_cache_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double cache_ = 0.0;
    bool has_cache_ = false;
};

}  // namespace raresim
