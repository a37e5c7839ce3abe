#pragma once

#include <compare>
#include <optional>
#include <utility>
#include <vector>

namespace hbpo {

// Budget-aware reward parameters. `beta` scales the cosine term, `alpha`
// is the per-token deviation penalty applied above budget, `l_max` is the
// maximum context length in tokens.
struct RewardConfig {
  double beta = 1.0;
  double alpha = 4e-4;
  int l_max = 4096;

  void validate() const;  // throws ConfigError naming the bad field
};

// A token allowance assigned to a rollout subgroup.
struct BudgetLevel {
  int tokens = 0;

  auto operator<=>(const BudgetLevel&) const = default;
};

enum class RewardBranch {
  OverBudgetCorrect,    // correct, b < n_gen <= l_max
  WithinBudgetCorrect,  // correct, n_gen <= b
  Zero,                 // incorrect or n_gen > l_max
};

struct RewardOutcome {
  double value = 0.0;
  RewardBranch branch = RewardBranch::Zero;
};

// Reward for a correct response that stayed within budget. Constant in
// n_gen: beta * cos(pi * b / (2 * l_max)). Strictly decreasing in b.
double within_budget_reward(BudgetLevel b, const RewardConfig& cfg);

// Reward for a correct response that exceeded budget b:
// beta * cos(pi * n_gen / (2 * l_max)) - alpha * |n_gen - b|.
// Not clamped at zero; far over budget may earn a negative reward.
double over_budget_reward(double n_gen, BudgetLevel b, const RewardConfig& cfg);

// The full piecewise reward. Total over n_gen >= 0: incorrect responses and
// responses longer than l_max fall into the zero branch.
RewardOutcome reward(double n_gen, bool correct, BudgetLevel b, const RewardConfig& cfg);

// Budgets ranked by the reward a correct response of length n_gen would
// earn under each, highest first; ties broken by the smaller budget.
std::vector<std::pair<BudgetLevel, double>> budget_preference(
    double n_gen, const std::vector<BudgetLevel>& budgets, const RewardConfig& cfg);

// Smallest generation length at which b_high's reward curve overtakes
// (or ties) b_low's, located by a stride-16 scan plus bisection to an
// absolute tolerance of 0.5 tokens. Requires b_low < b_high.
std::optional<double> complexity_threshold(BudgetLevel b_low, BudgetLevel b_high,
                                           const RewardConfig& cfg);

}  // namespace hbpo
