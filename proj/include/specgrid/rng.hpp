#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace specgrid {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream tag so that agents, environments and
/// phases each get an independent, reproducible generator.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// Uniform double in [lo, hi).
double uniform_real(Rng& rng, double lo, double hi);

/// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

std::string rng_state(const Rng& rng);
Rng rng_from_state(const std::string& state);

}  // namespace specgrid
