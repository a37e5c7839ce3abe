#include "hbpo/advantage.hpp"

#include <cmath>
#include <string>

#include "hbpo/errors.hpp"

namespace hbpo {

void SubgroupBatch::validate() const {
  const int k = schedule.subgroup_count();
  if (k == 0) throw BatchError("batch " + query_id + ": empty schedule");
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (const RolloutRecord& r : records) {
    if (r.subgroup < 0 || r.subgroup >= k)
      throw BatchError("batch " + query_id + ": record subgroup " +
                       std::to_string(r.subgroup) + " out of range");
    if (r.budget != schedule.budgets[r.subgroup])
      throw BatchError("batch " + query_id + ": record budget " +
                       std::to_string(r.budget.tokens) + " does not match subgroup " +
                       std::to_string(r.subgroup));
    if (r.n_gen < 0) throw BatchError("batch " + query_id + ": negative n_gen");
    ++counts[r.subgroup];
  }
  for (int i = 0; i < k; ++i)
    if (counts[i] == 0)
      throw BatchError("batch " + query_id + ": subgroup " + std::to_string(i) + " is empty");
}

std::vector<SubgroupStats> intra_advantage(const SubgroupBatch& batch, const RewardConfig& cfg) {
  batch.validate();
  const int k = batch.schedule.subgroup_count();
  std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (const RolloutRecord& r : batch.records) {
    sums[r.subgroup] += r.reward;
    ++counts[r.subgroup];
  }
  std::vector<SubgroupStats> stats(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    stats[i].budget = batch.schedule.budgets[i];
    stats[i].mean_reward = sums[i] / counts[i];
    stats[i].baseline = within_budget_reward(stats[i].budget, cfg);
    stats[i].intra = stats[i].mean_reward - stats[i].baseline;
  }
  return stats;
}

std::vector<double> inter_advantage(const SubgroupBatch& batch, double eps_std) {
  batch.validate();
  const std::size_t n = batch.records.size();
  if (n < 2) throw BatchError("batch " + batch.query_id + ": needs at least 2 records");

  double mean = 0.0;
  for (const RolloutRecord& r : batch.records) mean += r.reward;
  mean /= static_cast<double>(n);

  double var = 0.0;
  for (const RolloutRecord& r : batch.records) {
    const double d = r.reward - mean;
    var += d * d;
  }
  const double std = std::sqrt(var / static_cast<double>(n));

  std::vector<double> inter(n, 0.0);
  if (std >= eps_std)
    for (std::size_t j = 0; j < n; ++j) inter[j] = (batch.records[j].reward - mean) / std;
  return inter;
}

AdvantageSet compute_advantages(const SubgroupBatch& batch, const RewardConfig& cfg,
                                double eps_std, IntraMode mode) {
  AdvantageSet set;
  set.subgroups = intra_advantage(batch, cfg);
  set.inter = inter_advantage(batch, eps_std);

  const std::size_t n = batch.records.size();
  double mean = 0.0;
  for (const RolloutRecord& r : batch.records) mean += r.reward;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const RolloutRecord& r : batch.records) {
    const double d = r.reward - mean;
    var += d * d;
  }
  set.mean_reward = mean;
  set.std_reward = std::sqrt(var / static_cast<double>(n));

  set.combined.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const RolloutRecord& r = batch.records[j];
    const double intra = mode == IntraMode::SubgroupMean
                             ? set.subgroups[r.subgroup].intra
                             : r.reward - set.subgroups[r.subgroup].baseline;
    set.combined[j] = intra + set.inter[j];
  }
  return set;
}

}  // namespace hbpo
