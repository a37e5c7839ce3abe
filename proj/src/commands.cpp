#include "hbpo/commands.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "format.hpp"
#include "hbpo/errors.hpp"

namespace hbpo {

namespace {

using nlohmann::json;

json step_report_to_json(const StepReport& r) {
  return json{{"type", "step"},
              {"step", r.step},
              {"mean_reward", r.mean_reward},
              {"mean_length", r.mean_length},
              {"std_length", r.std_length},
              {"per_tier_mean_length", r.per_tier_mean_length},
              {"loss", r.loss},
              {"accuracy", r.accuracy}};
}

json trace_to_json(int step, const QueryTrace& trace) {
  json subgroups = json::array();
  for (const SubgroupStats& s : trace.advantages.subgroups)
    subgroups.push_back({{"budget", s.budget.tokens},
                         {"mean_reward", s.mean_reward},
                         {"baseline", s.baseline},
                         {"intra", s.intra}});
  json records = json::array();
  for (std::size_t j = 0; j < trace.batch.records.size(); ++j) {
    const RolloutRecord& r = trace.batch.records[j];
    records.push_back({{"subgroup", r.subgroup},
                       {"budget", r.budget.tokens},
                       {"n_gen", r.n_gen},
                       {"correct", r.correct},
                       {"reward", r.reward},
                       {"old_logprob", r.old_logprob},
                       {"inter", trace.advantages.inter[j]},
                       {"combined", trace.advantages.combined[j]}});
  }
  return json{{"type", "advantages"},
              {"step", step},
              {"query_id", trace.batch.query_id},
              {"mean_reward", trace.advantages.mean_reward},
              {"std_reward", trace.advantages.std_reward},
              {"subgroups", subgroups},
              {"records", records}};
}

json eval_report_to_json(const EvalReport& r) {
  return json{{"setting", r.setting},
              {"per_tier_accuracy", r.per_tier_accuracy},
              {"per_tier_mean_length", r.per_tier_mean_length},
              {"per_tier_count", r.per_tier_count},
              {"overall_accuracy", r.overall_accuracy},
              {"overall_mean_tokens", r.overall_mean_tokens},
              {"adaptation_ratio", r.adaptation_ratio}};
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string checkpoint_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_%06d.json", step);
  return buf;
}

}  // namespace

TrainingRun run_training(const RunConfig& cfg, const std::filesystem::path& run_dir,
                         int threads, const std::string& config_snapshot, bool quiet) {
  namespace fs = std::filesystem;
  fs::create_directories(run_dir / "checkpoints");
  fs::create_directories(run_dir / "curves");

  write_text_file(run_dir / "config.json", config_snapshot);

  const TrainerConfig trainer_cfg = cfg.trainer_config();

  {
    RngState dataset_rng{cfg.env.seed, 0};
    const std::vector<Problem> dataset = make_dataset(cfg.env.n_problems, cfg.env, dataset_rng);
    std::ofstream out(run_dir / "dataset.jsonl");
    if (!out) throw std::runtime_error("cannot write " + (run_dir / "dataset.jsonl").string());
    for (const Problem& p : dataset)
      out << json{{"id", p.id}, {"tier", p.tier}, {"required_length", p.required_length}}.dump()
          << "\n";
  }

  std::ofstream log(run_dir / "run.jsonl");
  if (!log) throw std::runtime_error("cannot write " + (run_dir / "run.jsonl").string());

  PolicyParams init = PolicyParams::zeros(
      cfg.env.tiers,
      cfg.policy_bin_lengths.empty() ? default_bin_lengths() : cfg.policy_bin_lengths);

  const int progress_every = std::max(1, trainer_cfg.steps / 5);
  StepSink sink = [&](const StepReport& report, const std::vector<QueryTrace>& traces) {
    log << step_report_to_json(report).dump() << "\n";
    if (trainer_cfg.log_advantages)
      for (const QueryTrace& trace : traces)
        log << trace_to_json(report.step, trace).dump() << "\n";
    if (!quiet && (report.step + 1) % progress_every == 0)
      std::cout << "step " << report.step + 1 << "/" << trainer_cfg.steps
                << "  reward " << report.mean_reward << "  len " << report.mean_length
                << "  acc " << report.accuracy << "\n";
  };

  TrainingRun run;
  run.run_dir = run_dir;

  // Checkpoints need the evolving policy, which the sink cannot see; run
  // the step loop here instead of through train().
  trainer_cfg.validate();
  cfg.env.validate(trainer_cfg.reward.l_max);
  init.validate(trainer_cfg.reward.l_max);

  RngState dataset_rng{cfg.env.seed, 0};
  const std::vector<Problem> dataset = make_dataset(cfg.env.n_problems, cfg.env, dataset_rng);

  run.result.policy = init;
  for (int t = 0; t < trainer_cfg.steps; ++t) {
    std::vector<QueryTrace> traces;
    StepReport report;
    try {
      report = train_step(run.result.policy, dataset, cfg.env, trainer_cfg, t, threads,
                          trainer_cfg.log_advantages ? &traces : nullptr);
    } catch (const std::exception& e) {
      throw std::runtime_error("train: step " + std::to_string(t) + ": " + e.what());
    }
    sink(report, traces);
    if ((t + 1) % trainer_cfg.checkpoint_every == 0)
      save_checkpoint(run.result.policy, run_dir / "checkpoints" / checkpoint_name(t + 1));
    run.result.reports.push_back(std::move(report));
  }
  log.close();

  save_checkpoint(run.result.policy, run_dir / "checkpoints" / "ckpt_final.json");

  run.natural = evaluate(run.result.policy, cfg.env, EvalSetting::natural(), cfg.eval.n_eval,
                         cfg.eval.seed);
  run.minimal = evaluate(run.result.policy, cfg.env, EvalSetting::minimal_prompt(),
                         cfg.eval.n_eval, cfg.eval.seed);
  const json final_eval = {{"natural", eval_report_to_json(run.natural)},
                           {"minimal-prompt", eval_report_to_json(run.minimal)}};
  write_text_file(run_dir / "final_eval.json", final_eval.dump(2) + "\n");

  export_training_curves(run_dir / "run.jsonl", run_dir / "curves" / "training_curves.csv");

  if (!quiet) {
    std::cout << "natural: acc " << run.natural.overall_accuracy << ", mean tokens "
              << run.natural.overall_mean_tokens << ", adaptation ratio "
              << run.natural.adaptation_ratio << "\n";
    std::cout << "minimal-prompt: acc " << run.minimal.overall_accuracy << ", mean tokens "
              << run.minimal.overall_mean_tokens << "\n";
    std::cout << "run dir: " << run_dir.string() << "\n";
  }
  return run;
}

int cmd_train(const std::string& config_path, const RunOptions& opts) {
  try {
    const std::string snapshot = read_text_file(config_path);
    const RunConfig cfg = parse_run_config(snapshot);
    const std::filesystem::path run_dir =
        opts.output_dir_override.empty() ? cfg.output_dir : opts.output_dir_override;
    run_training(cfg, run_dir, opts.threads, snapshot, opts.quiet);
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
             const std::string& setting, int budget_tokens, int n_eval_override,
             std::int64_t seed_override, const std::string& out_path) {
  try {
    const RunConfig cfg = load_run_config(config_path);
    EvalSetting eval_setting;
    if (setting == "natural")
      eval_setting = EvalSetting::natural();
    else if (setting == "minimal")
      eval_setting = EvalSetting::minimal_prompt();
    else if (setting == "budget")
      eval_setting = EvalSetting::fixed_budget({budget_tokens}, cfg.reward.l_max);
    else
      throw ConfigError("eval.setting: expected natural, minimal or budget");
    if (setting == "budget" && (budget_tokens < 1 || budget_tokens > cfg.reward.l_max))
      throw ConfigError("eval.budget: outside [1, reward.l_max]");

    const PolicyParams policy = load_checkpoint(checkpoint_path);
    policy.validate(cfg.reward.l_max);
    const int n_eval = n_eval_override > 0 ? n_eval_override : cfg.eval.n_eval;
    const std::uint64_t seed =
        seed_override >= 0 ? static_cast<std::uint64_t>(seed_override) : cfg.eval.seed;

    const EvalReport report = evaluate(policy, cfg.env, eval_setting, n_eval, seed);
    const std::string text = eval_report_to_json(report).dump(2) + "\n";
    if (out_path.empty())
      std::cout << text;
    else
      write_text_file(out_path, text);
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_sweep(const std::string& config_path, const std::vector<int>& k_list, int mean_target,
              const RunOptions& opts) {
  try {
    const RunConfig base_cfg = load_run_config(config_path);
    if (k_list.empty()) throw ConfigError("sweep: k list must be non-empty");

    // Validate every k before training anything.
    std::vector<RunConfig> configs;
    for (int k : k_list) {
      RunConfig cfg = base_cfg;
      cfg.schedule = make_schedule(k, mean_target, base_cfg.schedule.rollouts_per_query,
                                   base_cfg.reward.l_max);
      cfg.validate();
      configs.push_back(std::move(cfg));
    }

    const std::filesystem::path out_dir =
        opts.output_dir_override.empty() ? base_cfg.output_dir : opts.output_dir_override;
    std::filesystem::create_directories(out_dir);

    std::ostringstream csv;
    csv << "k,budgets,accuracy,mean_tokens,adaptation_ratio\n";
    std::ostringstream table;
    table << "k    budgets                  accuracy  mean_tokens  adaptation_ratio\n";

    for (std::size_t i = 0; i < configs.size(); ++i) {
      const int k = k_list[i];
      if (!opts.quiet) std::cout << "=== sweep k=" << k << " ===\n";
      const TrainingRun run =
          run_training(configs[i], out_dir / ("k" + std::to_string(k)), opts.threads,
                       run_config_to_json(configs[i]), opts.quiet);
      std::string budgets;
      for (BudgetLevel b : configs[i].schedule.budgets) {
        if (!budgets.empty()) budgets += " ";
        budgets += std::to_string(b.tokens);
      }
      csv << k << ",\"" << budgets << "\"," << format_double(run.natural.overall_accuracy)
          << ',' << format_double(run.natural.overall_mean_tokens) << ','
          << format_double(run.natural.adaptation_ratio) << "\n";
      char row[160];
      std::snprintf(row, sizeof(row), "%-4d %-24s %8.4f  %11.1f  %16.3f\n", k, budgets.c_str(),
                    run.natural.overall_accuracy, run.natural.overall_mean_tokens,
                    run.natural.adaptation_ratio);
      table << row;
    }

    write_text_file(out_dir / "sweep_summary.csv", csv.str());
    std::cout << table.str();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_reward_curves(const std::string& config_path, const std::string& out_csv,
                      const std::string& thresholds_csv) {
  try {
    const RunConfig cfg = load_run_config(config_path);
    const std::vector<BudgetLevel>& budgets = cfg.schedule.budgets;

    std::ofstream curves(out_csv);
    if (!curves) throw std::runtime_error("cannot write " + out_csv);
    curves << "n_gen";
    for (BudgetLevel b : budgets) curves << ",b" << b.tokens;
    curves << "\n";
    for (int n = 1; n <= cfg.reward.l_max; ++n) {
      curves << n;
      for (BudgetLevel b : budgets)
        curves << ',' << format_double(reward(n, true, b, cfg.reward).value);
      curves << "\n";
    }

    std::ofstream thresholds(thresholds_csv);
    if (!thresholds) throw std::runtime_error("cannot write " + thresholds_csv);
    thresholds << "b_low,b_high,threshold\n";
    for (std::size_t i = 0; i < budgets.size(); ++i)
      for (std::size_t j = i + 1; j < budgets.size(); ++j) {
        const auto crossing = complexity_threshold(budgets[i], budgets[j], cfg.reward);
        thresholds << budgets[i].tokens << ',' << budgets[j].tokens << ','
                   << (crossing ? format_double(*crossing) : std::string("none")) << "\n";
      }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_analyze(const std::string& transcripts_path, const std::string& out_json,
                const std::string& out_csv, const std::vector<std::string>& keywords) {
  try {
    std::ifstream in(transcripts_path);
    if (!in) throw std::runtime_error("cannot open " + transcripts_path);
    std::vector<std::string> kws = keywords.empty() ? default_reflection_keywords() : keywords;
    for (std::string& kw : kws)
      for (char& c : kw) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    json per_transcript = json::array();
    double thinking_sum = 0.0;
    double solution_kw_sum = 0.0;
    std::map<std::string, long long> totals;
    for (const std::string& kw : kws) totals[kw] = 0;

    std::string line;
    int line_no = 0;
    int count = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j;
      std::string id;
      std::string text;
      try {
        j = json::parse(line);
        id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
        text = j.at("text").get<std::string>();
      } catch (const std::exception& e) {
        throw std::runtime_error(transcripts_path + " line " + std::to_string(line_no) + ": " +
                                 e.what());
      }
      const TranscriptStats stats = analyze_transcript(text, kws);
      per_transcript.push_back({{"id", id},
                                {"thinking_proportion", stats.thinking_proportion},
                                {"keyword_counts", stats.keyword_counts},
                                {"keywords_in_solution", stats.keywords_in_solution},
                                {"unclosed_think", stats.unclosed_think}});
      thinking_sum += stats.thinking_proportion;
      solution_kw_sum += stats.keywords_in_solution;
      for (const auto& [kw, c] : stats.keyword_counts) totals[kw] += c;
      ++count;
    }

    write_text_file(out_json, per_transcript.dump(2) + "\n");

    std::ostringstream csv;
    csv << "metric,value\n";
    if (count > 0) {
      csv << "n_transcripts," << count << "\n";
      csv << "mean_thinking_proportion," << format_double(thinking_sum / count) << "\n";
      csv << "mean_keywords_in_solution," << format_double(solution_kw_sum / count) << "\n";
      for (const std::string& kw : kws)
        csv << "mean_count:" << kw << ','
            << format_double(static_cast<double>(totals[kw]) / count) << "\n";
    }
    write_text_file(out_csv, csv.str());
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace hbpo
