#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hbpo/env.hpp"
#include "hbpo/hierarchy.hpp"
#include "hbpo/reward.hpp"
#include "hbpo/trainer.hpp"

namespace hbpo {

struct EvalConfig {
  int n_eval = 4000;
  std::uint64_t seed = 1000;
};

// One JSON document with sections mirroring the owning modules. Unknown
// keys are rejected so ablation-script typos surface immediately.
struct RunConfig {
  RewardConfig reward;
  BudgetSchedule schedule = {{{512}, {1024}, {2048}, {2560}}, 16};
  EnvConfig env;
  std::vector<int> policy_bin_lengths;  // defaults from default_bin_lengths()
  TrainerConfig trainer;
  EvalConfig eval;
  std::string output_dir = "runs/default";

  // Cross-module invariants (budgets and bins against l_max, divisibility).
  void validate() const;

  TrainerConfig trainer_config() const;  // trainer with reward + schedule filled in
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Serialization that parse_run_config accepts back; used for snapshots of
// derived configs (e.g. sweep sub-runs).
std::string run_config_to_json(const RunConfig& cfg);

std::string default_run_config_json();

}  // namespace hbpo
