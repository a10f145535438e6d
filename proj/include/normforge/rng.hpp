#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "normforge/common.hpp"

namespace normforge {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t z);

/// Seed for the named sub-stream `name` of `seed`. Stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name,
                          std::uint64_t index);

inline Rng make_rng(std::uint64_t seed) { return Rng(mix_seed(seed)); }

/// Standard Gaussian vector of length n.
Vector gaussian_vector(Index n, Rng& rng);

/// Uniform direction on the Euclidean unit sphere in R^n.
Vector unit_direction(Index n, Rng& rng);

}  // namespace normforge
