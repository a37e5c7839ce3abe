#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hbpo/advantage.hpp"
#include "hbpo/analysis.hpp"
#include "hbpo/commands.hpp"
#include "hbpo/config.hpp"
#include "hbpo/env.hpp"
#include "hbpo/errors.hpp"
#include "hbpo/hierarchy.hpp"
#include "hbpo/policy.hpp"
#include "hbpo/reward.hpp"
#include "hbpo/rng.hpp"
#include "hbpo/trainer.hpp"

namespace py = pybind11;
using namespace hbpo;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Budget-conditioned policy optimization on a synthetic reasoning-length "
            "environment";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BatchError>(m, "BatchError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ValueError);

  py::class_<RngState>(m, "RngState")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed") = 0,
           py::arg("counter") = 0)
      .def_readwrite("seed", &RngState::seed)
      .def_readwrite("counter", &RngState::counter)
      .def("next_uniform", &RngState::next_uniform);
  m.def("uniform01", &uniform01, py::arg("seed"), py::arg("counter"));

  // reward
  py::class_<RewardConfig>(m, "RewardConfig")
      .def(py::init([](double beta, double alpha, int l_max) {
             RewardConfig cfg{beta, alpha, l_max};
             cfg.validate();
             return cfg;
           }),
           py::arg("beta") = 1.0, py::arg("alpha") = 4e-4, py::arg("l_max") = 4096)
      .def_readwrite("beta", &RewardConfig::beta)
      .def_readwrite("alpha", &RewardConfig::alpha)
      .def_readwrite("l_max", &RewardConfig::l_max)
      .def("validate", &RewardConfig::validate);

  py::class_<BudgetLevel>(m, "BudgetLevel")
      .def(py::init<int>(), py::arg("tokens"))
      .def_readwrite("tokens", &BudgetLevel::tokens)
      .def("__repr__",
           [](const BudgetLevel& b) { return "BudgetLevel(" + std::to_string(b.tokens) + ")"; });
  py::implicitly_convertible<py::int_, BudgetLevel>();

  py::enum_<RewardBranch>(m, "RewardBranch")
      .value("OverBudgetCorrect", RewardBranch::OverBudgetCorrect)
      .value("WithinBudgetCorrect", RewardBranch::WithinBudgetCorrect)
      .value("Zero", RewardBranch::Zero);

  py::class_<RewardOutcome>(m, "RewardOutcome")
      .def_readonly("value", &RewardOutcome::value)
      .def_readonly("branch", &RewardOutcome::branch);

  m.def("within_budget_reward", &within_budget_reward, py::arg("budget"), py::arg("config"));
  m.def("over_budget_reward", &over_budget_reward, py::arg("n_gen"), py::arg("budget"),
        py::arg("config"));
  m.def("reward", &reward, py::arg("n_gen"), py::arg("correct"), py::arg("budget"),
        py::arg("config"));
  m.def("budget_preference", &budget_preference, py::arg("n_gen"), py::arg("budgets"),
        py::arg("config"));
  m.def("complexity_threshold", &complexity_threshold, py::arg("b_low"), py::arg("b_high"),
        py::arg("config"));

  // hierarchy
  py::class_<BudgetSchedule>(m, "BudgetSchedule")
      .def(py::init([](const std::vector<int>& budgets, int rollouts_per_query) {
             BudgetSchedule s;
             s.budgets.clear();
             for (int t : budgets) s.budgets.push_back({t});
             s.rollouts_per_query = rollouts_per_query;
             return s;
           }),
           py::arg("budgets"), py::arg("rollouts_per_query"))
      .def_property_readonly("budgets",
                             [](const BudgetSchedule& s) {
                               std::vector<int> xs;
                               for (BudgetLevel b : s.budgets) xs.push_back(b.tokens);
                               return xs;
                             })
      .def_readwrite("rollouts_per_query", &BudgetSchedule::rollouts_per_query)
      .def("subgroup_count", &BudgetSchedule::subgroup_count)
      .def("subgroup_size", &BudgetSchedule::subgroup_size)
      .def("validate", &BudgetSchedule::validate, py::arg("l_max"));

  py::class_<BudgetPrompt>(m, "BudgetPrompt")
      .def_readonly("text", &BudgetPrompt::text)
      .def_property_readonly("budget", [](const BudgetPrompt& p) -> py::object {
        if (!p.budget) return py::none();
        return py::cast(*p.budget);
      });

  m.def("render_prompt", &render_prompt, py::arg("budget"));
  m.def("render_minimal_prompt", &render_minimal_prompt);
  m.def("partition", &partition, py::arg("schedule"));
  m.def("make_schedule", &make_schedule, py::arg("k"), py::arg("mean_target"), py::arg("n"),
        py::arg("l_max"));

  // env
  py::class_<Problem>(m, "Problem")
      .def(py::init<int, int, int>(), py::arg("id"), py::arg("tier"),
           py::arg("required_length"))
      .def_readwrite("id", &Problem::id)
      .def_readwrite("tier", &Problem::tier)
      .def_readwrite("required_length", &Problem::required_length);

  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def_readwrite("tiers", &EnvConfig::tiers)
      .def_readwrite("required_lengths", &EnvConfig::required_lengths)
      .def_readwrite("p_floor", &EnvConfig::p_floor)
      .def_readwrite("p_ceil", &EnvConfig::p_ceil)
      .def_readwrite("tau", &EnvConfig::tau)
      .def_readwrite("seed", &EnvConfig::seed)
      .def_readwrite("n_problems", &EnvConfig::n_problems)
      .def("validate", &EnvConfig::validate, py::arg("l_max"));

  m.def("correctness_prob", &correctness_prob, py::arg("n_gen"), py::arg("problem"),
        py::arg("config"));
  m.def("sample_outcome", &sample_outcome, py::arg("n_gen"), py::arg("problem"),
        py::arg("config"), py::arg("rng"));
  m.def("make_dataset", &make_dataset, py::arg("n_problems"), py::arg("config"), py::arg("rng"));

  // policy
  py::class_<PolicyParams>(m, "PolicyParams")
      .def_static("zeros", &PolicyParams::zeros, py::arg("tiers"), py::arg("bin_lengths"))
      .def_readonly("tiers", &PolicyParams::tiers)
      .def_readonly("bins", &PolicyParams::bins)
      .def_readwrite("theta_base", &PolicyParams::theta_base)
      .def_readwrite("theta_budget", &PolicyParams::theta_budget)
      .def_readwrite("bin_lengths", &PolicyParams::bin_lengths)
      .def("validate", &PolicyParams::validate, py::arg("l_max"));

  m.def("default_bin_lengths", &default_bin_lengths);

  py::class_<Context>(m, "Context")
      .def(py::init<int, double>(), py::arg("tier"), py::arg("budget_feature") = 0.0)
      .def_readwrite("tier", &Context::tier)
      .def_readwrite("budget_feature", &Context::budget_feature);

  py::class_<SampleResult>(m, "SampleResult")
      .def_readonly("bin", &SampleResult::bin)
      .def_readonly("n_gen", &SampleResult::n_gen)
      .def_readonly("log_prob", &SampleResult::log_prob);

  py::class_<PolicyGrad>(m, "PolicyGrad")
      .def_readonly("theta_base", &PolicyGrad::theta_base)
      .def_readonly("theta_budget", &PolicyGrad::theta_budget);

  m.def("logits", &logits, py::arg("ctx"), py::arg("params"));
  m.def("log_probs", &log_probs, py::arg("ctx"), py::arg("params"));
  m.def("log_prob", &log_prob, py::arg("ctx"), py::arg("bin"), py::arg("params"));
  m.def("sample", &sample, py::arg("ctx"), py::arg("params"), py::arg("rng"));
  m.def("grad_log_prob", &grad_log_prob, py::arg("ctx"), py::arg("bin"), py::arg("params"));
  m.def("save_checkpoint", &save_checkpoint, py::arg("params"), py::arg("path"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  // advantage
  py::class_<RolloutRecord>(m, "RolloutRecord")
      .def(py::init([](int subgroup, BudgetLevel budget, int n_gen, bool correct,
                       double reward_value, double old_logprob) {
             return RolloutRecord{subgroup, budget, n_gen, correct, reward_value, old_logprob};
           }),
           py::arg("subgroup"), py::arg("budget"), py::arg("n_gen"), py::arg("correct"),
           py::arg("reward"), py::arg("old_logprob") = 0.0)
      .def_readwrite("subgroup", &RolloutRecord::subgroup)
      .def_readwrite("budget", &RolloutRecord::budget)
      .def_readwrite("n_gen", &RolloutRecord::n_gen)
      .def_readwrite("correct", &RolloutRecord::correct)
      .def_readwrite("reward", &RolloutRecord::reward)
      .def_readwrite("old_logprob", &RolloutRecord::old_logprob);

  py::class_<SubgroupBatch>(m, "SubgroupBatch")
      .def(py::init([](std::string query_id, std::vector<RolloutRecord> records,
                       const BudgetSchedule& schedule) {
             SubgroupBatch b{std::move(query_id), std::move(records), schedule};
             b.validate();
             return b;
           }),
           py::arg("query_id"), py::arg("records"), py::arg("schedule"))
      .def_readwrite("query_id", &SubgroupBatch::query_id)
      .def_readwrite("records", &SubgroupBatch::records)
      .def_readwrite("schedule", &SubgroupBatch::schedule);

  py::enum_<IntraMode>(m, "IntraMode")
      .value("SubgroupMean", IntraMode::SubgroupMean)
      .value("PerRecord", IntraMode::PerRecord);

  py::class_<SubgroupStats>(m, "SubgroupStats")
      .def_readonly("budget", &SubgroupStats::budget)
      .def_readonly("mean_reward", &SubgroupStats::mean_reward)
      .def_readonly("baseline", &SubgroupStats::baseline)
      .def_readonly("intra", &SubgroupStats::intra);

  py::class_<AdvantageSet>(m, "AdvantageSet")
      .def_readonly("subgroups", &AdvantageSet::subgroups)
      .def_readonly("inter", &AdvantageSet::inter)
      .def_readonly("combined", &AdvantageSet::combined)
      .def_readonly("mean_reward", &AdvantageSet::mean_reward)
      .def_readonly("std_reward", &AdvantageSet::std_reward);

  m.def("intra_advantage", &intra_advantage, py::arg("batch"), py::arg("config"));
  m.def("inter_advantage", &inter_advantage, py::arg("batch"), py::arg("eps_std") = 1e-8);
  m.def("compute_advantages", &compute_advantages, py::arg("batch"), py::arg("config"),
        py::arg("eps_std") = 1e-8, py::arg("mode") = IntraMode::SubgroupMean);

  // trainer
  py::class_<TrainerConfig>(m, "TrainerConfig")
      .def(py::init<>())
      .def_readwrite("eps_low", &TrainerConfig::eps_low)
      .def_readwrite("eps_high", &TrainerConfig::eps_high)
      .def_readwrite("learning_rate", &TrainerConfig::learning_rate)
      .def_readwrite("batch_size", &TrainerConfig::batch_size)
      .def_readwrite("steps", &TrainerConfig::steps)
      .def_readwrite("schedule", &TrainerConfig::schedule)
      .def_readwrite("reward", &TrainerConfig::reward)
      .def_readwrite("kl_coeff", &TrainerConfig::kl_coeff)
      .def_readwrite("seed", &TrainerConfig::seed)
      .def_readwrite("eps_std", &TrainerConfig::eps_std)
      .def_readwrite("intra_mode", &TrainerConfig::intra_mode)
      .def_readwrite("checkpoint_every", &TrainerConfig::checkpoint_every)
      .def_readwrite("log_advantages", &TrainerConfig::log_advantages)
      .def("validate", &TrainerConfig::validate);

  py::class_<StepReport>(m, "StepReport")
      .def_readonly("step", &StepReport::step)
      .def_readonly("mean_reward", &StepReport::mean_reward)
      .def_readonly("mean_length", &StepReport::mean_length)
      .def_readonly("std_length", &StepReport::std_length)
      .def_readonly("per_tier_mean_length", &StepReport::per_tier_mean_length)
      .def_readonly("loss", &StepReport::loss)
      .def_readonly("accuracy", &StepReport::accuracy);

  m.def("clipped_loss_term", &clipped_loss_term, py::arg("rho"), py::arg("advantage"),
        py::arg("config"));

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("policy", &TrainResult::policy)
      .def_readonly("reports", &TrainResult::reports);

  m.def(
      "train",
      [](const PolicyParams& init, const EnvConfig& env, const TrainerConfig& cfg, int threads) {
        return train(init, env, cfg, threads);
      },
      py::arg("init"), py::arg("env"), py::arg("config"), py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>());

  // analysis
  py::class_<EvalSetting>(m, "EvalSetting")
      .def_static("natural", &EvalSetting::natural)
      .def_static("minimal_prompt", &EvalSetting::minimal_prompt)
      .def_static("fixed_budget", &EvalSetting::fixed_budget, py::arg("budget"),
                  py::arg("l_max"))
      .def_property_readonly("label", &EvalSetting::label);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("setting", &EvalReport::setting)
      .def_readonly("per_tier_accuracy", &EvalReport::per_tier_accuracy)
      .def_readonly("per_tier_mean_length", &EvalReport::per_tier_mean_length)
      .def_readonly("per_tier_count", &EvalReport::per_tier_count)
      .def_readonly("overall_accuracy", &EvalReport::overall_accuracy)
      .def_readonly("overall_mean_tokens", &EvalReport::overall_mean_tokens)
      .def_readonly("adaptation_ratio", &EvalReport::adaptation_ratio);

  m.def("evaluate", &evaluate, py::arg("policy"), py::arg("env"), py::arg("setting"),
        py::arg("n_eval"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());

  py::class_<TranscriptStats>(m, "TranscriptStats")
      .def_readonly("thinking_proportion", &TranscriptStats::thinking_proportion)
      .def_readonly("keyword_counts", &TranscriptStats::keyword_counts)
      .def_readonly("keywords_in_solution", &TranscriptStats::keywords_in_solution)
      .def_readonly("unclosed_think", &TranscriptStats::unclosed_think);

  m.def(
      "analyze_transcript",
      [](const std::string& text, const std::vector<std::string>& keywords) {
        return analyze_transcript(text, keywords.empty() ? default_reflection_keywords()
                                                         : keywords);
      },
      py::arg("text"), py::arg("keywords") = std::vector<std::string>{});
  m.def("default_reflection_keywords", &default_reflection_keywords);
  m.def("export_training_curves", &export_training_curves, py::arg("run_log"),
        py::arg("out_csv"));

  m.def("default_run_config_json", &default_run_config_json);

  m.attr("__version__") = "0.1.0";
}
