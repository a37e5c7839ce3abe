#include "hbpo/hierarchy.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "hbpo/errors.hpp"

namespace hbpo {

void BudgetSchedule::validate(int l_max) const {
  if (budgets.empty()) throw ConfigError("schedule.budgets: must be non-empty");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i].tokens < 1)
      throw ConfigError("schedule.budgets: budget " + std::to_string(budgets[i].tokens) +
                        " must be >= 1");
    if (budgets[i].tokens > l_max)
      throw ConfigError("schedule.budgets: budget " + std::to_string(budgets[i].tokens) +
                        " exceeds reward.l_max=" + std::to_string(l_max));
    if (i > 0 && !(budgets[i - 1] < budgets[i]))
      throw ConfigError("schedule.budgets: must be strictly ascending");
  }
  if (rollouts_per_query < 1)
    throw ConfigError("schedule.rollouts_per_query: must be >= 1");
  if (rollouts_per_query % subgroup_count() != 0)
    throw ConfigError("schedule.rollouts_per_query: " + std::to_string(rollouts_per_query) +
                      " not divisible by " + std::to_string(subgroup_count()) + " budgets");
}

BudgetPrompt render_prompt(BudgetLevel b) {
  return {"I will answer the question within " + std::to_string(b.tokens) + " tokens", b};
}

BudgetPrompt render_minimal_prompt() {
  return {"I will answer the question with minimal tokens", std::nullopt};
}

std::vector<std::pair<int, BudgetLevel>> partition(const BudgetSchedule& schedule) {
  const int k = schedule.subgroup_count();
  if (k == 0 || schedule.rollouts_per_query % k != 0)
    throw ConfigError("schedule.rollouts_per_query: not divisible by budget count");
  const int per = schedule.subgroup_size();
  std::vector<std::pair<int, BudgetLevel>> slots;
  slots.reserve(schedule.rollouts_per_query);
  for (int j = 0; j < schedule.rollouts_per_query; ++j) {
    const int sub = j / per;
    slots.emplace_back(sub, schedule.budgets[sub]);
  }
  return slots;
}

BudgetSchedule make_schedule(int k, int mean_target, int n, int l_max) {
  if (k < 1) throw ConfigError("schedule: subgroup count must be >= 1");
  if (n < 1 || n % k != 0)
    throw ConfigError("schedule.rollouts_per_query: " + std::to_string(n) +
                      " not divisible by k=" + std::to_string(k));

  std::vector<int> tokens;
  if (k == 1) {
    tokens = {mean_target};
  } else if (k == 4 && mean_target == 1536) {
    tokens = {512, 1024, 2048, 2560};
  } else {
    const int lo = 512;
    const int hi = 2 * mean_target - 512;
    if (hi <= lo)
      throw ConfigError("schedule: mean budget " + std::to_string(mean_target) +
                        " too small for k=" + std::to_string(k));
    tokens.resize(k);
    for (int i = 0; i < k; ++i)
      tokens[i] = static_cast<int>(
          std::llround(lo + static_cast<double>(i) * (hi - lo) / (k - 1)));
    // Exact mean: absorb the rounding residue into the largest budget.
    const long long want = static_cast<long long>(k) * mean_target;
    const long long got = std::accumulate(tokens.begin(), tokens.end(), 0LL);
    tokens.back() += static_cast<int>(want - got);
  }

  BudgetSchedule schedule;
  schedule.rollouts_per_query = n;
  for (int t : tokens) schedule.budgets.push_back({t});
  schedule.validate(l_max);
  return schedule;
}

}  // namespace hbpo
