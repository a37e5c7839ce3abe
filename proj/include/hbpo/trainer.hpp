#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hbpo/advantage.hpp"
#include "hbpo/env.hpp"
#include "hbpo/hierarchy.hpp"
#include "hbpo/policy.hpp"
#include "hbpo/reward.hpp"

namespace hbpo {

struct TrainerConfig {
  double eps_low = 0.2;
  double eps_high = 0.28;
  double learning_rate = 0.6;
  int batch_size = 32;  // queries per step
  int steps = 500;
  BudgetSchedule schedule = {{{512}, {1024}, {2048}, {2560}}, 16};
  RewardConfig reward;
  double kl_coeff = 0.0;  // disabled; validation rejects anything else
  std::uint64_t seed = 0;
  double eps_std = 1e-8;
  IntraMode intra_mode = IntraMode::SubgroupMean;
  int checkpoint_every = 100;
  bool log_advantages = true;

  void validate() const;  // throws ConfigError
};

struct StepReport {
  int step = 0;
  double mean_reward = 0.0;
  double mean_length = 0.0;
  double std_length = 0.0;  // population std
  std::vector<double> per_tier_mean_length;  // 0.0 for tiers unsampled this step
  double loss = 0.0;
  double accuracy = 0.0;
};

// Per-sample negative clipped surrogate:
// -min(rho * A, clip(rho, 1 - eps_low, 1 + eps_high) * A).
double clipped_loss_term(double rho, double advantage, const TrainerConfig& cfg);

// A rollout frozen for the policy update: the context and action it was
// sampled with, its log-probability under the sampling policy, and its
// combined advantage.
struct FrozenSample {
  Context ctx;
  int bin = 0;
  double old_logprob = 0.0;
  double advantage = 0.0;
};

// Mean clipped surrogate over the samples, evaluated at params (which may
// differ from the sampling policy; rho is recomputed).
double surrogate_loss(const std::vector<FrozenSample>& samples, const PolicyParams& params,
                      const TrainerConfig& cfg);

// Analytic gradient of surrogate_loss. Zero where the clip saturates.
PolicyGrad surrogate_gradient(const std::vector<FrozenSample>& samples,
                              const PolicyParams& params, const TrainerConfig& cfg);

// Everything produced for one query during a step; handed to the log sink.
struct QueryTrace {
  SubgroupBatch batch;
  AdvantageSet advantages;
};

using StepSink = std::function<void(const StepReport&, const std::vector<QueryTrace>&)>;

// One rollout-and-update iteration. Rollout generation is distributed over
// `threads` workers with per-slot counter-indexed RNG streams and a fixed
// reduction order, so results are identical for any thread count.
StepReport train_step(PolicyParams& policy, const std::vector<Problem>& dataset,
                      const EnvConfig& env, const TrainerConfig& cfg, int step_index,
                      int threads, std::vector<QueryTrace>* traces = nullptr);

struct TrainResult {
  PolicyParams policy;
  std::vector<StepReport> reports;
};

// cfg.steps sequential iterations over a dataset drawn from env.
TrainResult train(const PolicyParams& init, const EnvConfig& env, const TrainerConfig& cfg,
                  int threads = 1, const StepSink& sink = nullptr);

}  // namespace hbpo
