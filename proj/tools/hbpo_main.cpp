#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hbpo/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hbpo: budget-conditioned policy optimization on a synthetic "
               "reasoning-length environment"};
  app.require_subcommand(1);

  std::string config_path;
  hbpo::RunOptions opts;

  auto* train = app.add_subcommand("train", "Train a policy and persist the run directory");
  train->add_option("-c,--config", config_path, "Run config JSON")->required();
  train->add_option("-t,--threads", opts.threads, "Rollout worker threads (results identical)");
  train->add_option("-o,--output-dir", opts.output_dir_override,
                    "Override the config's output_dir");
  train->add_flag("-q,--quiet", opts.quiet, "Suppress progress output");

  std::string checkpoint_path;
  std::string setting = "natural";
  int budget_tokens = 0;
  int n_eval_override = 0;
  std::int64_t seed_override = -1;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("-c,--config", config_path, "Run config JSON")->required();
  eval->add_option("-k,--checkpoint", checkpoint_path, "Checkpoint JSON")->required();
  eval->add_option("-s,--setting", setting, "natural | minimal | budget")
      ->check(CLI::IsMember({"natural", "minimal", "budget"}));
  eval->add_option("-b,--budget", budget_tokens, "Budget tokens for --setting budget");
  eval->add_option("-n,--n-eval", n_eval_override, "Evaluation rollouts");
  eval->add_option("--seed", seed_override, "Evaluation seed");
  eval->add_option("-o,--out", eval_out, "Write report JSON here instead of stdout");

  std::vector<int> k_list;
  int mean_target = 1536;
  auto* sweep = app.add_subcommand("sweep", "Train once per subgroup count at a fixed mean budget");
  sweep->add_option("-c,--config", config_path, "Run config JSON")->required();
  sweep->add_option("-k,--k-list", k_list, "Subgroup counts, e.g. -k 1 2 4")->required();
  sweep->add_option("-m,--mean-budget", mean_target, "Mean budget held constant across runs");
  sweep->add_option("-t,--threads", opts.threads, "Rollout worker threads");
  sweep->add_option("-o,--output-dir", opts.output_dir_override,
                    "Override the config's output_dir");
  sweep->add_flag("-q,--quiet", opts.quiet, "Suppress progress output");

  std::string curves_out = "reward_curves.csv";
  std::string thresholds_out;
  auto* curves = app.add_subcommand("reward-curves",
                                    "Export per-budget reward curves and pairwise thresholds");
  curves->add_option("-c,--config", config_path, "Run config JSON")->required();
  curves->add_option("-o,--out", curves_out, "Curves CSV path");
  curves->add_option("--thresholds-out", thresholds_out,
                     "Thresholds CSV path (default: <out>_thresholds.csv)");

  std::string transcripts_path;
  std::string analyze_json = "transcript_stats.json";
  std::string analyze_csv = "transcript_aggregate.csv";
  std::vector<std::string> keywords;
  auto* analyze = app.add_subcommand("analyze", "Reflection-keyword and thinking-segment stats");
  analyze->add_option("-i,--input", transcripts_path, "Transcripts JSONL with {id, text}")
      ->required();
  analyze->add_option("--out-json", analyze_json, "Per-transcript stats JSON");
  analyze->add_option("--out-csv", analyze_csv, "Aggregate CSV");
  analyze->add_option("--keywords", keywords, "Override the default keyword set");

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) return hbpo::cmd_train(config_path, opts);
  if (eval->parsed())
    return hbpo::cmd_eval(config_path, checkpoint_path, setting, budget_tokens, n_eval_override,
                          seed_override, eval_out);
  if (sweep->parsed()) return hbpo::cmd_sweep(config_path, k_list, mean_target, opts);
  if (curves->parsed()) {
    if (thresholds_out.empty()) {
      thresholds_out = curves_out;
      const auto dot = thresholds_out.rfind(".csv");
      if (dot != std::string::npos) thresholds_out.resize(dot);
      thresholds_out += "_thresholds.csv";
    }
    return hbpo::cmd_reward_curves(config_path, curves_out, thresholds_out);
  }
  if (analyze->parsed())
    return hbpo::cmd_analyze(transcripts_path, analyze_json, analyze_csv, keywords);
  return hbpo::kExitRuntime;
}
