#pragma once

#include <cstdint>

namespace hbpo {

// Counter-based random stream: every draw is a pure function of
// (seed, counter), so rollouts can be assigned fixed counter ranges and
// executed in any order or on any number of threads without changing the
// stream. The generator is the SplitMix64 finalizer keyed by
// seed + golden-ratio * counter.
inline std::uint64_t mix_bits(std::uint64_t seed, std::uint64_t counter) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::uint64_t seed, std::uint64_t counter) noexcept {
  return static_cast<double>(mix_bits(seed, counter) >> 11) * 0x1.0p-53;
}

struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  double next_uniform() noexcept { return uniform01(seed, counter++); }
};

}  // namespace hbpo
