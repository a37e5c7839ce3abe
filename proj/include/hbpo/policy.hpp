#pragma once

#include <filesystem>
#include <vector>

#include "hbpo/rng.hpp"

namespace hbpo {

// Categorical policy over response-length bins. Logits for a context are
// theta_base[tier] + theta_budget * budget_feature, so budget conditioning
// and tier preference share one parameter set.
struct PolicyParams {
  int tiers = 0;
  int bins = 0;
  std::vector<double> theta_base;    // tiers x bins, row-major
  std::vector<double> theta_budget;  // bins
  std::vector<int> bin_lengths;      // representative n_gen per bin, ascending

  static PolicyParams zeros(int tiers, std::vector<int> bin_lengths);

  double base_at(int tier_row, int bin) const { return theta_base[tier_row * bins + bin]; }
  double& base_at(int tier_row, int bin) { return theta_base[tier_row * bins + bin]; }

  void validate(int l_max) const;  // throws ConfigError
};

std::vector<int> default_bin_lengths();

// budget_feature is b / l_max during training, 0 for natural inference,
// -1 for the minimal-tokens prompt.
struct Context {
  int tier = 1;  // 1-based
  double budget_feature = 0.0;
};

std::vector<double> logits(const Context& ctx, const PolicyParams& params);

// Log-softmax with max subtraction; exp of the entries sums to 1.
std::vector<double> log_probs(const Context& ctx, const PolicyParams& params);
double log_prob(const Context& ctx, int bin, const PolicyParams& params);

struct SampleResult {
  int bin = 0;
  int n_gen = 0;
  double log_prob = 0.0;
};

// Categorical draw consuming one uniform from the stream.
SampleResult sample(const Context& ctx, const PolicyParams& params, RngState& rng);

// Gradient of log pi(bin | ctx) with the same layout as PolicyParams.
struct PolicyGrad {
  std::vector<double> theta_base;
  std::vector<double> theta_budget;

  static PolicyGrad zeros_like(const PolicyParams& params);
  void scale(double c);
  void add_scaled(const PolicyGrad& other, double c);
};

PolicyGrad grad_log_prob(const Context& ctx, int bin, const PolicyParams& params);

// Adds weight * grad_log_prob(ctx, bin) into out without allocating.
void accumulate_log_prob_grad(const Context& ctx, int bin, const PolicyParams& params,
                              double weight, PolicyGrad& out);

// Checkpoints are a JSON list of named float arrays.
void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_checkpoint(const std::filesystem::path& path);

}  // namespace hbpo
