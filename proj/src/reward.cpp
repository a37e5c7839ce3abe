#include "hbpo/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hbpo/errors.hpp"

namespace hbpo {

void RewardConfig::validate() const {
  if (!(beta > 0.0)) throw ConfigError("reward.beta: must be > 0");
  if (!(alpha >= 0.0)) throw ConfigError("reward.alpha: must be >= 0");
  if (l_max < 1) throw ConfigError("reward.l_max: must be >= 1");
}

double within_budget_reward(BudgetLevel b, const RewardConfig& cfg) {
  if (b.tokens < 1 || b.tokens > cfg.l_max)
    throw std::domain_error("budget " + std::to_string(b.tokens) +
                            " outside [1, l_max=" + std::to_string(cfg.l_max) + "]");
  return cfg.beta * std::cos(std::numbers::pi * b.tokens / (2.0 * cfg.l_max));
}

double over_budget_reward(double n_gen, BudgetLevel b, const RewardConfig& cfg) {
  if (n_gen > cfg.l_max)
    throw std::domain_error("n_gen " + std::to_string(n_gen) +
                            " exceeds l_max=" + std::to_string(cfg.l_max));
  return cfg.beta * std::cos(std::numbers::pi * n_gen / (2.0 * cfg.l_max)) -
         cfg.alpha * std::abs(n_gen - b.tokens);
}

RewardOutcome reward(double n_gen, bool correct, BudgetLevel b, const RewardConfig& cfg) {
  if (n_gen < 0.0) throw std::domain_error("n_gen must be >= 0");
  if (!correct || n_gen > cfg.l_max) return {0.0, RewardBranch::Zero};
  if (n_gen > b.tokens)
    return {over_budget_reward(n_gen, b, cfg), RewardBranch::OverBudgetCorrect};
  return {within_budget_reward(b, cfg), RewardBranch::WithinBudgetCorrect};
}

std::vector<std::pair<BudgetLevel, double>> budget_preference(
    double n_gen, const std::vector<BudgetLevel>& budgets, const RewardConfig& cfg) {
  if (budgets.empty()) throw ConfigError("budgets: must be non-empty");
  for (std::size_t i = 1; i < budgets.size(); ++i)
    if (!(budgets[i - 1] < budgets[i]))
      throw ConfigError("budgets: must be strictly ascending");
  if (n_gen > cfg.l_max)
    throw std::domain_error("n_gen exceeds l_max");

  std::vector<std::pair<BudgetLevel, double>> ranked;
  ranked.reserve(budgets.size());
  for (BudgetLevel b : budgets) ranked.emplace_back(b, reward(n_gen, true, b, cfg).value);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

std::optional<double> complexity_threshold(BudgetLevel b_low, BudgetLevel b_high,
                                           const RewardConfig& cfg) {
  if (!(b_low < b_high))
    throw std::invalid_argument("complexity_threshold requires b_low < b_high");

  auto prefers_high = [&](double n) {
    return reward(n, true, b_high, cfg).value >= reward(n, true, b_low, cfg).value;
  };

  // The curves are piecewise smooth with at most a few crossings, so a
  // coarse grid scan followed by bisection is robust.
  constexpr double kStride = 16.0;
  double prev = 0.0;
  double hit = -1.0;
  for (double n = kStride; n < cfg.l_max + kStride; n += kStride) {
    const double probe = std::min(n, static_cast<double>(cfg.l_max));
    if (prefers_high(probe)) {
      hit = probe;
      break;
    }
    prev = probe;
    if (probe >= cfg.l_max) break;
  }
  if (hit < 0.0) return std::nullopt;

  // prev is strictly below the first crossing (or 0); bisect the predicate.
  while (hit - prev > 0.5) {
    const double mid = 0.5 * (prev + hit);
    if (prefers_high(mid))
      hit = mid;
    else
      prev = mid;
  }
  return hit;
}

}  // namespace hbpo
