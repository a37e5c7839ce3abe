#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hbpo/reward.hpp"

namespace hbpo {

// Ascending budget levels plus the rollout count they partition.
struct BudgetSchedule {
  std::vector<BudgetLevel> budgets;
  int rollouts_per_query = 16;

  int subgroup_count() const { return static_cast<int>(budgets.size()); }
  int subgroup_size() const { return rollouts_per_query / subgroup_count(); }

  void validate(int l_max) const;  // throws ConfigError
};

// Rendered conditioning prompt; budget == nullopt is the minimal-tokens
// prompt used for efficiency evaluation.
struct BudgetPrompt {
  std::string text;
  std::optional<BudgetLevel> budget;
};

BudgetPrompt render_prompt(BudgetLevel b);
BudgetPrompt render_minimal_prompt();

// Deterministic slot assignment: slot j belongs to subgroup
// j / (n/k) and carries that subgroup's budget.
std::vector<std::pair<int, BudgetLevel>> partition(const BudgetSchedule& schedule);

// Budget sets with an exact mean of mean_target: k=1 degenerates to the
// mean itself, k=2 spans {512, 2*mean-512}, k=4 at mean 1536 is the
// canonical {512, 1024, 2048, 2560}, anything else is evenly spaced over
// the same span with the largest budget adjusted for integer rounding.
BudgetSchedule make_schedule(int k, int mean_target, int n, int l_max);

}  // namespace hbpo
