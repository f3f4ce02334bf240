// Deterministic random number helpers. Substream seeds are derived with a
// splitmix64 hash so Monte Carlo runs stay independent of thread count and
// execution order.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dsm {

/// splitmix64 finalizer; mixes a seed and an index into a substream seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Standard normal draw via Box-Muller; platform-stable for a given engine state.
inline double sample_standard_normal(std::mt19937_64& rng) {
    // Map to (0,1]; the log argument never reaches zero.
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace dsm
