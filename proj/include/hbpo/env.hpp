#pragma once

#include <cstdint>
#include <vector>

#include "hbpo/rng.hpp"

namespace hbpo {

// A synthetic problem: tier indexes into the environment's required-length
// table, and required_length is the token count around which the
// correctness curve is centered.
struct Problem {
  int id = 0;
  int tier = 1;  // 1-based, 1 = easiest
  int required_length = 0;
};

struct EnvConfig {
  int tiers = 3;
  std::vector<int> required_lengths = {256, 768, 1408};
  double p_floor = 0.05;
  double p_ceil = 0.95;
  double tau = 48.0;  // sigmoid temperature, in tokens
  std::uint64_t seed = 0;
  int n_problems = 256;  // training dataset size

  void validate(int l_max) const;  // throws ConfigError
};

// p_floor + (p_ceil - p_floor) * sigmoid((n_gen - required_length) / tau).
// Monotone non-decreasing in n_gen.
double correctness_prob(double n_gen, const Problem& p, const EnvConfig& cfg);

// One Bernoulli draw at correctness_prob; consumes exactly one value from
// the stream, so outcomes are fully determined by (seed, draw index).
bool sample_outcome(double n_gen, const Problem& p, const EnvConfig& cfg, RngState& rng);

// Problems with uniformly drawn tiers; consumes n_problems draws.
std::vector<Problem> make_dataset(int n_problems, const EnvConfig& cfg, RngState& rng);

}  // namespace hbpo
