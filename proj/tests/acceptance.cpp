// Acceptance suite: one check per release criterion, each printed as a
// single PASS/FAIL line with its runtime. Exits non-zero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hbpo/advantage.hpp"
#include "hbpo/analysis.hpp"
#include "hbpo/commands.hpp"
#include "hbpo/config.hpp"
#include "hbpo/env.hpp"
#include "hbpo/errors.hpp"
#include "hbpo/policy.hpp"
#include "hbpo/reward.hpp"
#include "hbpo/rng.hpp"
#include "hbpo/trainer.hpp"

using namespace hbpo;
namespace fs = std::filesystem;

namespace {

int failures = 0;
std::vector<std::string> notes;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    ++failures;
    notes.push_back(what);
  }
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "hbpo_acceptance";
  fs::create_directories(dir);
  return dir;
}

RunConfig default_config() {
  const fs::path bundled = fs::path(HBPO_SOURCE_DIR) / "configs" / "default.json";
  if (fs::exists(bundled)) return load_run_config(bundled);
  return parse_run_config(default_run_config_json());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Shared across criteria 5-7: one default training run.
TrainingRun* default_run = nullptr;

// --- criterion 1: reward correctness ---------------------------------------

bool criterion_reward() {
  const RewardConfig cfg{1.0, 4e-4, 4096};
  const std::vector<BudgetLevel> budgets = {{512}, {1024}, {2048}, {2560}};

  for (int n = 0; n <= cfg.l_max + 1; ++n) {
    for (const bool correct : {true, false}) {
      for (const BudgetLevel b : budgets) {
        const RewardOutcome out = reward(n, correct, b, cfg);
        // Case analysis straight from the piecewise definition.
        if (correct && n > b.tokens && n <= cfg.l_max) {
          expect(out.branch == RewardBranch::OverBudgetCorrect, "branch f1");
          const double want = cfg.beta * std::cos(std::numbers::pi * n / (2.0 * cfg.l_max)) -
                              cfg.alpha * (n - b.tokens);
          expect(std::abs(out.value - want) < 1e-12, "f1 value");
        } else if (correct && n <= b.tokens) {
          expect(out.branch == RewardBranch::WithinBudgetCorrect, "branch f2");
          const double want =
              cfg.beta * std::cos(std::numbers::pi * b.tokens / (2.0 * cfg.l_max));
          expect(out.value == want, "f2 value");
        } else {
          expect(out.branch == RewardBranch::Zero && out.value == 0.0, "zero branch");
        }
      }
    }

    // Boundary continuity at every candidate budget height.
    if (n >= 1 && n <= cfg.l_max)
      expect(over_budget_reward(n, {n}, cfg) == within_budget_reward({n}, cfg),
             "boundary continuity");

    // Inter-budget orderings.
    if (n >= 1 && n < budgets.front().tokens) {
      for (std::size_t i = 1; i < budgets.size(); ++i)
        expect(reward(n, true, budgets[i - 1], cfg).value >
                   reward(n, true, budgets[i], cfg).value,
               "short-response ordering");
    }
    if (n > budgets.back().tokens && n <= cfg.l_max) {
      for (std::size_t i = 1; i < budgets.size(); ++i)
        expect(reward(n, true, budgets[i], cfg).value >
                   reward(n, true, budgets[i - 1], cfg).value,
               "long-response ordering");
    }
  }
  return failures == 0;
}

// --- criterion 2: advantage statistics --------------------------------------

bool criterion_advantages() {
  const RewardConfig cfg{1.0, 4e-4, 4096};
  RngState rng{2024, 0};

  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + static_cast<int>(rng.next_uniform() * 4);
    SubgroupBatch batch;
    batch.query_id = "acc";
    int total = 0;
    for (int i = 0; i < k; ++i) {
      batch.schedule.budgets.push_back({256 * (i + 1)});
      const int per = 2 + static_cast<int>(rng.next_uniform() * 6);
      for (int j = 0; j < per; ++j) {
        const double r = rng.next_uniform() < 0.3 ? 0.0 : rng.next_uniform();
        batch.records.push_back({i, {256 * (i + 1)}, 100, r > 0, r, -1.0});
        ++total;
      }
    }
    batch.schedule.rollouts_per_query = total;

    const AdvantageSet set = compute_advantages(batch, cfg, 1e-8);

    if (set.std_reward >= 1e-8) {
      double mean = 0.0;
      for (double v : set.inter) mean += v;
      mean /= static_cast<double>(total);
      double var = 0.0;
      for (double v : set.inter) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(total));
      expect(std::abs(mean) < 1e-9, "inter mean 0");
      expect(std::abs(sd - 1.0) < 1e-9, "inter std 1");
    }

    for (int i = 0; i < total; ++i) {
      const int sub = batch.records[i].subgroup;
      expect(std::abs(set.combined[i] - (set.subgroups[sub].intra + set.inter[i])) < 1e-15,
             "combined = intra + inter");
    }

    // Loop-oracle equivalence for small batches.
    if (total <= 8) {
      double mean = 0.0;
      for (const auto& r : batch.records) mean += r.reward;
      mean /= total;
      double var = 0.0;
      for (const auto& r : batch.records) var += (r.reward - mean) * (r.reward - mean);
      const double sd = std::sqrt(var / total);
      for (int i = 0; i < total; ++i) {
        double mu = 0.0;
        int cnt = 0;
        for (const auto& r : batch.records)
          if (r.subgroup == batch.records[i].subgroup) {
            mu += r.reward;
            ++cnt;
          }
        mu /= cnt;
        const double baseline =
            cfg.beta * std::cos(std::numbers::pi * batch.records[i].budget.tokens /
                                (2.0 * cfg.l_max));
        const double inter = sd >= 1e-8 ? (batch.records[i].reward - mean) / sd : 0.0;
        expect(std::abs(set.combined[i] - (mu - baseline + inter)) < 1e-12, "loop oracle");
      }
    }
  }
  return failures == 0;
}

// --- criterion 3: gradient checks -------------------------------------------

bool criterion_gradients() {
  const double h = 1e-5;
  double worst_glp = 0.0;

  for (int trial = 0; trial < 120; ++trial) {
    PolicyParams p = PolicyParams::zeros(3, {64, 256, 512, 1024, 2048});
    RngState rng{static_cast<std::uint64_t>(trial), 0};
    for (double& v : p.theta_base) v = 3.0 * rng.next_uniform() - 1.5;
    for (double& v : p.theta_budget) v = 3.0 * rng.next_uniform() - 1.5;
    const Context ctx{1 + trial % 3, (trial % 5) * 0.3 - 0.3};
    const int action = trial % 5;

    const PolicyGrad grad = grad_log_prob(ctx, action, p);
    auto fd_check = [&](std::vector<double>& theta, const std::vector<double>& g) {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const double saved = theta[i];
        theta[i] = saved + h;
        const double up = log_prob(ctx, action, p);
        theta[i] = saved - h;
        const double down = log_prob(ctx, action, p);
        theta[i] = saved;
        const double fd = (up - down) / (2 * h);
        const double rel =
            std::abs(g[i] - fd) / std::max({1e-8, std::abs(g[i]), std::abs(fd)});
        worst_glp = std::max(worst_glp, rel);
      }
    };
    fd_check(p.theta_base, grad.theta_base);
    fd_check(p.theta_budget, grad.theta_budget);
  }
  expect(worst_glp < 1e-5, "grad_log_prob rel err " + std::to_string(worst_glp));

  TrainerConfig cfg;
  double worst_batch = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    PolicyParams p = PolicyParams::zeros(2, {64, 512, 2048});
    RngState rng{static_cast<std::uint64_t>(900 + trial), 0};
    for (double& v : p.theta_base) v = 2.0 * rng.next_uniform() - 1.0;
    for (double& v : p.theta_budget) v = 2.0 * rng.next_uniform() - 1.0;

    std::vector<FrozenSample> samples;
    for (int i = 0; i < 32; ++i) {
      const Context ctx{1 + i % 2, (i % 4) * 0.25};
      RngState draw{static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(i)};
      const SampleResult s = sample(ctx, p, draw);
      samples.push_back({ctx, s.bin, s.log_prob, 4.0 * rng.next_uniform() - 2.0});
    }
    const PolicyGrad grad = surrogate_gradient(samples, p, cfg);
    for (std::size_t i = 0; i < p.theta_base.size(); ++i) {
      const double saved = p.theta_base[i];
      p.theta_base[i] = saved + h;
      const double up = surrogate_loss(samples, p, cfg);
      p.theta_base[i] = saved - h;
      const double down = surrogate_loss(samples, p, cfg);
      p.theta_base[i] = saved;
      const double fd = (up - down) / (2 * h);
      const double rel =
          std::abs(grad.theta_base[i] - fd) /
          std::max({1e-6, std::abs(grad.theta_base[i]), std::abs(fd)});
      worst_batch = std::max(worst_batch, rel);
    }
  }
  expect(worst_batch < 1e-4, "batch surrogate rel err " + std::to_string(worst_batch));
  return failures == 0;
}

// --- criterion 4: clip behavior ----------------------------------------------

bool criterion_clip() {
  TrainerConfig cfg;
  expect(clipped_loss_term(1.0, 2.0, cfg) == -2.0, "rho=1 identity");
  expect(clipped_loss_term(1.0, -3.5, cfg) == 3.5, "rho=1 identity, negative A");
  expect(std::abs(clipped_loss_term(1.5, 2.0, cfg) - (-2.56)) < 1e-14, "high clip case");
  expect(std::abs(clipped_loss_term(0.5, -1.0, cfg) - 0.8) < 1e-14, "low clip case");

  const double lo = 1.0 - cfg.eps_low;
  const double hi = 1.0 + cfg.eps_high;
  for (int trial = 0; trial < 10000; ++trial) {
    const double rho = 0.01 + 2.99 * uniform01(4242, 2 * trial);
    const double a = 6.0 * uniform01(4242, 2 * trial + 1) - 3.0;
    const double term = clipped_loss_term(rho, a, cfg);
    double want;
    if (rho >= lo && rho <= hi)
      want = -rho * a;
    else if (rho > hi)
      want = a > 0.0 ? -hi * a : -rho * a;
    else
      want = a > 0.0 ? -rho * a : -lo * a;
    expect(term == want, "piecewise clip");
  }
  return failures == 0;
}

// --- criterion 5: emergent adaptation ---------------------------------------

bool criterion_adaptation() {
  const RunConfig cfg = default_config();
  const fs::path dir = scratch_dir() / "default_run";
  fs::remove_all(dir);
  static TrainingRun run =
      run_training(cfg, dir, /*threads=*/4, run_config_to_json(cfg), /*quiet=*/true);
  default_run = &run;

  const EvalReport& nat = run.natural;
  for (std::size_t d = 1; d < nat.per_tier_mean_length.size(); ++d)
    expect(nat.per_tier_mean_length[d - 1] <= nat.per_tier_mean_length[d] + 1e-9,
           "per-tier mean length non-decreasing");
  expect(nat.adaptation_ratio >= 1.5,
         "adaptation ratio " + std::to_string(nat.adaptation_ratio));

  // Baseline: a policy pinned to the longest bin for every tier.
  PolicyParams max_len = PolicyParams::zeros(
      cfg.env.tiers, cfg.policy_bin_lengths.empty() ? default_bin_lengths()
                                                    : cfg.policy_bin_lengths);
  for (int d = 0; d < max_len.tiers; ++d) max_len.base_at(d, max_len.bins - 1) = 50.0;
  const EvalReport baseline =
      evaluate(max_len, cfg.env, EvalSetting::natural(), cfg.eval.n_eval, cfg.eval.seed);
  expect(nat.overall_accuracy >= 0.95 * baseline.overall_accuracy,
         "accuracy " + std::to_string(nat.overall_accuracy) + " vs baseline " +
             std::to_string(baseline.overall_accuracy));
  return failures == 0;
}

// --- criterion 6: hierarchy ablation ----------------------------------------

bool criterion_hierarchy_ablation() {
  const RunConfig base = default_config();
  double ratios[5] = {0, 0, 0, 0, 0};
  for (const int k : {1, 2, 4}) {
    RunConfig cfg = base;
    cfg.schedule = make_schedule(k, 1536, base.schedule.rollouts_per_query, base.reward.l_max);
    cfg.validate();
    const fs::path dir = scratch_dir() / ("sweep_k" + std::to_string(k));
    fs::remove_all(dir);
    const TrainingRun run =
        run_training(cfg, dir, /*threads=*/4, run_config_to_json(cfg), /*quiet=*/true);
    ratios[k] = run.natural.adaptation_ratio;
  }
  expect(ratios[4] > ratios[1], "k=4 ratio " + std::to_string(ratios[4]) +
                                    " must exceed k=1 ratio " + std::to_string(ratios[1]));
  expect(ratios[1] >= 0.8 && ratios[1] <= 1.25,
         "k=1 ratio " + std::to_string(ratios[1]) + " outside [0.8, 1.25]");
  return failures == 0;
}

// --- criterion 7: efficiency prompting ---------------------------------------

bool criterion_efficiency_prompt() {
  expect(default_run != nullptr, "default training run available");
  if (default_run == nullptr) return false;
  const EvalReport& nat = default_run->natural;
  const EvalReport& min = default_run->minimal;
  expect(min.overall_mean_tokens < nat.overall_mean_tokens,
         "minimal tokens " + std::to_string(min.overall_mean_tokens) + " vs natural " +
             std::to_string(nat.overall_mean_tokens));
  expect(nat.overall_accuracy - min.overall_accuracy <= 0.15,
         "accuracy degradation " +
             std::to_string(nat.overall_accuracy - min.overall_accuracy));
  return failures == 0;
}

// --- criterion 8: determinism across parallelism ------------------------------

bool criterion_determinism() {
  RunConfig cfg = default_config();
  cfg.trainer.steps = 50;
  cfg.eval.n_eval = 500;
  const std::string snapshot = run_config_to_json(cfg);
  const fs::path cfg_path = scratch_dir() / "determinism_cfg.json";
  {
    std::ofstream out(cfg_path);
    out << snapshot;
  }

  const fs::path dir_a = scratch_dir() / "det_a";
  const fs::path dir_b = scratch_dir() / "det_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  RunOptions opts_a;
  opts_a.threads = 1;
  opts_a.quiet = true;
  opts_a.output_dir_override = dir_a.string();
  RunOptions opts_b;
  opts_b.threads = 8;
  opts_b.quiet = true;
  opts_b.output_dir_override = dir_b.string();

  expect(cmd_train(cfg_path.string(), opts_a) == kExitOk, "train run A");
  expect(cmd_train(cfg_path.string(), opts_b) == kExitOk, "train run B");

  expect(read_file(dir_a / "run.jsonl") == read_file(dir_b / "run.jsonl"),
         "run.jsonl byte-identical across 1 vs 8 worker threads");
  expect(!read_file(dir_a / "run.jsonl").empty(), "run log non-empty");
  expect(read_file(dir_a / "final_eval.json") == read_file(dir_b / "final_eval.json"),
         "final_eval.json byte-identical");
  expect(read_file(dir_a / "checkpoints" / "ckpt_final.json") ==
             read_file(dir_b / "checkpoints" / "ckpt_final.json"),
         "final checkpoint byte-identical");
  return failures == 0;
}

// --- criterion 9: transcript analyzer ----------------------------------------

bool criterion_transcripts() {
  const auto& kws = default_reflection_keywords();

  {
    const TranscriptStats s = analyze_transcript("<think> wait wait check </think> done", kws);
    expect(s.thinking_proportion == 0.75, "fixture proportion");
    expect(s.keyword_counts.at("wait") == 2 && s.keyword_counts.at("check") == 1,
           "fixture counts");
    expect(s.keywords_in_solution == 0, "fixture solution keywords");
  }
  {
    const TranscriptStats s = analyze_transcript("no tags here", kws);
    expect(s.thinking_proportion == 0.0, "untagged proportion");
  }
  {
    const TranscriptStats s =
        analyze_transcript("But remember: check, Verify; alternatively wait!", kws);
    for (const std::string& kw : kws)
      expect(s.keyword_counts.at(kw) == 1, "one of each keyword");
    expect(s.keywords_in_solution == 6, "all in solution");
  }
  {
    const TranscriptStats s = analyze_transcript("<think> never closed wait", kws);
    expect(s.unclosed_think, "unclosed flag");
    expect(s.thinking_proportion == 1.0, "unclosed proportion");
  }

  for (int trial = 0; trial < 10000; ++trial) {
    std::string text;
    const int len = static_cast<int>(uniform01(31337, 2 * trial) * 200);
    for (int i = 0; i < len; ++i) {
      const auto bits = mix_bits(31337, 5000000 + 300ULL * trial + i);
      if ((bits & 0x1f) == 0) {
        text += (bits >> 6 & 1) ? "<think>" : "</think>";
      } else {
        text += static_cast<char>(bits & 0xff);
      }
    }
    const TranscriptStats s = analyze_transcript(text, kws);
    expect(s.thinking_proportion >= 0.0 && s.thinking_proportion <= 1.0, "fuzz range");
    expect(s.keywords_in_solution >= 0, "fuzz count");
  }
  return failures == 0;
}

struct Criterion {
  std::string name;
  std::function<bool()> body;
  double time_limit_s;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"reward correctness suite", criterion_reward, 5.0},
      {"advantage statistics and loop oracle", criterion_advantages, 30.0},
      {"gradient finite-difference checks", criterion_gradients, 10.0},
      {"clipped surrogate behavior", criterion_clip, 30.0},
      {"emergent difficulty-adaptive allocation", criterion_adaptation, 60.0},
      {"hierarchy granularity ablation", criterion_hierarchy_ablation, 180.0},
      {"efficiency prompting", criterion_efficiency_prompt, 30.0},
      {"determinism across worker parallelism", criterion_determinism, 60.0},
      {"transcript analyzer fixtures and fuzzing", criterion_transcripts, 30.0},
  };

  int exit_code = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    failures = 0;
    notes.clear();
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string error;
    try {
      ok = criteria[i].body();
    } catch (const std::exception& e) {
      error = e.what();
      ok = false;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > criteria[i].time_limit_s) {
      ok = false;
      notes.push_back("runtime " + std::to_string(elapsed) + "s exceeds " +
                      std::to_string(criteria[i].time_limit_s) + "s");
    }
    std::printf("[%s] criterion %zu: %s (%.2fs)\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name.c_str(), elapsed);
    if (!ok) {
      exit_code = 1;
      if (!error.empty()) std::printf("       exception: %s\n", error.c_str());
      for (std::size_t n = 0; n < notes.size() && n < 5; ++n)
        std::printf("       %s\n", notes[n].c_str());
    }
  }
  return exit_code;
}
