#pragma once

#include <cstdint>
#include <random>

#include "scs/types.hpp"

namespace scs {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive decorrelated seeds from (base, index) pairs.
constexpr std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the index-th independent stream under a base seed. Monte Carlo loops use
/// one stream per trial so results do not depend on the number of worker threads.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix_seed(mix_seed(base) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

inline Vector standard_normal_vector(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
    return z;
}

}  // namespace scs
