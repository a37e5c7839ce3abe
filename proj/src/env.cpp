#include "hbpo/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hbpo/errors.hpp"

namespace hbpo {

void EnvConfig::validate(int l_max) const {
  if (tiers < 1) throw ConfigError("env.tiers: must be >= 1");
  if (static_cast<int>(required_lengths.size()) != tiers)
    throw ConfigError("env.required_lengths: need exactly " + std::to_string(tiers) +
                      " entries, got " + std::to_string(required_lengths.size()));
  for (std::size_t i = 0; i < required_lengths.size(); ++i) {
    if (required_lengths[i] < 1)
      throw ConfigError("env.required_lengths: entries must be >= 1");
    if (i > 0 && required_lengths[i] <= required_lengths[i - 1])
      throw ConfigError("env.required_lengths: must be strictly increasing");
  }
  if (required_lengths.back() >= l_max)
    throw ConfigError("env.required_lengths: hardest tier must stay below reward.l_max=" +
                      std::to_string(l_max));
  if (!(p_floor >= 0.0 && p_floor < p_ceil && p_ceil <= 1.0))
    throw ConfigError("env.p_floor/p_ceil: need 0 <= p_floor < p_ceil <= 1");
  if (!(tau > 0.0)) throw ConfigError("env.tau: must be > 0");
  if (n_problems < 1) throw ConfigError("env.n_problems: must be >= 1");
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double correctness_prob(double n_gen, const Problem& p, const EnvConfig& cfg) {
  const double x = (n_gen - p.required_length) / cfg.tau;
  return cfg.p_floor + (cfg.p_ceil - cfg.p_floor) * sigmoid(x);
}

bool sample_outcome(double n_gen, const Problem& p, const EnvConfig& cfg, RngState& rng) {
  return rng.next_uniform() < correctness_prob(n_gen, p, cfg);
}

std::vector<Problem> make_dataset(int n_problems, const EnvConfig& cfg, RngState& rng) {
  std::vector<Problem> problems;
  problems.reserve(static_cast<std::size_t>(n_problems));
  for (int i = 0; i < n_problems; ++i) {
    const double u = rng.next_uniform();
    const int tier = 1 + std::min(cfg.tiers - 1, static_cast<int>(u * cfg.tiers));
    problems.push_back({i, tier, cfg.required_lengths[tier - 1]});
  }
  return problems;
}

}  // namespace hbpo
