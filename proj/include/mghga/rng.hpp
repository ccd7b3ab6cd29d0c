#pragma once

#include <cstdint>
#include <random>

namespace mghga {

using Rng = std::mt19937_64;

// splitmix64 finaliser; spreads (seed, stream) pairs into independent seeds.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Named streams so that every consumer of randomness in a run draws from its
// own sequence.
enum class Stream : std::uint64_t {
  split = 1,
  surrogate = 2,
  victim = 3,
  attack = 4,
  init = 5,
  dropout = 6,
};

inline Rng make_rng(std::uint64_t seed, Stream s) {
  return Rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
}

}  // namespace mghga
