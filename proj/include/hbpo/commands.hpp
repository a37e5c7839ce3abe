#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hbpo/analysis.hpp"
#include "hbpo/config.hpp"
#include "hbpo/trainer.hpp"

namespace hbpo {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct RunOptions {
  int threads = 1;
  std::string output_dir_override;  // empty = use the config's output_dir
  bool quiet = false;
};

struct TrainingRun {
  std::filesystem::path run_dir;
  TrainResult result;
  EvalReport natural;
  EvalReport minimal;
};

// Full training run with run-directory persistence: config snapshot,
// dataset.jsonl, run.jsonl (step + advantage records), checkpoints,
// final_eval.json and curves/training_curves.csv.
TrainingRun run_training(const RunConfig& cfg, const std::filesystem::path& run_dir,
                         int threads, const std::string& config_snapshot, bool quiet = false);

int cmd_train(const std::string& config_path, const RunOptions& opts);
int cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
             const std::string& setting, int budget_tokens, int n_eval_override,
             std::int64_t seed_override, const std::string& out_path);
int cmd_sweep(const std::string& config_path, const std::vector<int>& k_list, int mean_target,
              const RunOptions& opts);
int cmd_reward_curves(const std::string& config_path, const std::string& out_csv,
                      const std::string& thresholds_csv);
int cmd_analyze(const std::string& transcripts_path, const std::string& out_json,
                const std::string& out_csv, const std::vector<std::string>& keywords);

}  // namespace hbpo
