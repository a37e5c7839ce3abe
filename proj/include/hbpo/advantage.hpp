#pragma once

#include <string>
#include <vector>

#include "hbpo/hierarchy.hpp"
#include "hbpo/reward.hpp"

namespace hbpo {

// One sampled response within a query's rollout group.
struct RolloutRecord {
  int subgroup = 0;
  BudgetLevel budget;
  int n_gen = 0;
  bool correct = false;
  double reward = 0.0;
  double old_logprob = 0.0;
};

// All rollouts for one query, grouped by subgroup in schedule order.
struct SubgroupBatch {
  std::string query_id;
  std::vector<RolloutRecord> records;
  BudgetSchedule schedule;

  void validate() const;  // throws BatchError
};

// Which baseline the per-record combined advantage subtracts: the
// subgroup's mean reward against its budget baseline (the default), or
// each record's own reward against the baseline.
enum class IntraMode { SubgroupMean, PerRecord };

struct SubgroupStats {
  BudgetLevel budget;
  double mean_reward = 0.0;
  double baseline = 0.0;  // within_budget_reward(budget)
  double intra = 0.0;     // mean_reward - baseline
};

struct AdvantageSet {
  std::vector<SubgroupStats> subgroups;
  std::vector<double> inter;     // per record, standardized over the batch
  std::vector<double> combined;  // per record, intra + inter
  double mean_reward = 0.0;
  double std_reward = 0.0;  // population std
};

// Per-subgroup mean reward minus the budget baseline.
std::vector<SubgroupStats> intra_advantage(const SubgroupBatch& batch, const RewardConfig& cfg);

// Rewards standardized over all records of the batch (population std);
// all zero when the std falls below eps_std.
std::vector<double> inter_advantage(const SubgroupBatch& batch, double eps_std);

// Both components plus their per-record sum.
AdvantageSet compute_advantages(const SubgroupBatch& batch, const RewardConfig& cfg,
                                double eps_std, IntraMode mode = IntraMode::SubgroupMean);

}  // namespace hbpo
