#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hbpo/env.hpp"
#include "hbpo/policy.hpp"
#include "hbpo/reward.hpp"

namespace hbpo {

struct EvalSetting {
  enum class Kind { Natural, MinimalPrompt, FixedBudget };
  Kind kind = Kind::Natural;
  BudgetLevel budget;          // only for FixedBudget
  double budget_feature = 0.0;  // 0 natural, -1 minimal, b / l_max fixed

  static EvalSetting natural() { return {Kind::Natural, {}, 0.0}; }
  static EvalSetting minimal_prompt() { return {Kind::MinimalPrompt, {}, -1.0}; }
  static EvalSetting fixed_budget(BudgetLevel b, int l_max) {
    return {Kind::FixedBudget, b, static_cast<double>(b.tokens) / l_max};
  }

  std::string label() const;
};

struct EvalReport {
  std::string setting;
  std::vector<double> per_tier_accuracy;
  std::vector<double> per_tier_mean_length;
  std::vector<int> per_tier_count;
  double overall_accuracy = 0.0;
  double overall_mean_tokens = 0.0;
  double adaptation_ratio = 0.0;  // hardest-tier mean length / easiest-tier
};

// Samples the policy once per problem on a fresh dataset drawn from seed,
// then aggregates accuracy and token usage per tier.
EvalReport evaluate(const PolicyParams& policy, const EnvConfig& env, const EvalSetting& setting,
                    int n_eval, std::uint64_t seed);

struct TranscriptStats {
  double thinking_proportion = 0.0;  // tokens in the first think segment / total
  std::map<std::string, int> keyword_counts;
  int keywords_in_solution = 0;
  bool unclosed_think = false;
};

const std::vector<std::string>& default_reflection_keywords();

// Whitespace tokens; the first <think>...</think> pair bounds the thinking
// segment (tags excluded from all counts); keyword matching is
// case-insensitive on whole alphanumeric words. An unclosed <think> treats
// the remainder as thinking and sets the warning flag.
TranscriptStats analyze_transcript(std::string_view text,
                                   const std::vector<std::string>& keywords);

// run.jsonl step records -> CSV (step, mean_length, std_length, accuracy,
// mean_reward) with shortest-round-trip number formatting.
void export_training_curves(const std::filesystem::path& run_log,
                            const std::filesystem::path& out_csv);

}  // namespace hbpo
