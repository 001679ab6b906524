#pragma once

#include <cstdint>
#include <cmath>

namespace heatlab {

// SplitMix64: the master seed expansion used everywhere in the lab.
// Per-task seeds are derived as split(master, index); the exact update
// below is part of the reproducibility contract (see README).
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (avoids implementation-defined
    // std::normal_distribution so outputs are bit-stable across stdlibs).
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    SplitMix64 rng(master ^ (0xa0761d6478bd642fULL * (index + 1)));
    return rng.next();
}

} // namespace heatlab
