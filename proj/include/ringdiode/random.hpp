#pragma once

#include <cstdint>
#include <random>

namespace ringdiode {

using Rng = std::mt19937_64;

/// Independent, reproducible stream for item `index` of a run seeded with
/// `seed`. `salt` separates unrelated uses of the same (seed, index).
Rng make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0);

/// Direction cosine u of a spontaneously emitted photon, density
/// (3/8)(1 + u^2) on [-1, 1], by rejection from the uniform density
/// (acceptance (1 + u^2)/2, 2/3 on average).
double sample_recoil(Rng& rng);

/// Uniform draw on the open interval (0, 1).
double open_unit(Rng& rng);

}  // namespace ringdiode
