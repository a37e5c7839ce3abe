#include "hbpo/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hbpo/errors.hpp"
#include "hbpo/policy.hpp"

namespace hbpo {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& section,
                         const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key))
      throw ConfigError(section.empty() ? key + ": unknown key"
                                        : section + "." + key + ": unknown key");
  }
}

template <typename T>
void read_field(const json& obj, const std::string& section, const std::string& key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
}

void parse_reward(const json& j, RewardConfig& cfg) {
  reject_unknown_keys(j, "reward", {"beta", "alpha", "l_max"});
  read_field(j, "reward", "beta", cfg.beta);
  read_field(j, "reward", "alpha", cfg.alpha);
  read_field(j, "reward", "l_max", cfg.l_max);
}

void parse_schedule(const json& j, BudgetSchedule& schedule) {
  reject_unknown_keys(j, "schedule", {"budgets", "rollouts_per_query"});
  if (j.contains("budgets")) {
    std::vector<int> tokens;
    read_field(j, "schedule", "budgets", tokens);
    schedule.budgets.clear();
    for (int t : tokens) schedule.budgets.push_back({t});
  }
  read_field(j, "schedule", "rollouts_per_query", schedule.rollouts_per_query);
}

void parse_env(const json& j, EnvConfig& cfg) {
  reject_unknown_keys(j, "env",
                      {"tiers", "required_lengths", "p_floor", "p_ceil", "tau", "seed",
                       "n_problems"});
  read_field(j, "env", "tiers", cfg.tiers);
  read_field(j, "env", "required_lengths", cfg.required_lengths);
  read_field(j, "env", "p_floor", cfg.p_floor);
  read_field(j, "env", "p_ceil", cfg.p_ceil);
  read_field(j, "env", "tau", cfg.tau);
  read_field(j, "env", "seed", cfg.seed);
  read_field(j, "env", "n_problems", cfg.n_problems);
}

void parse_policy(const json& j, std::vector<int>& bin_lengths) {
  reject_unknown_keys(j, "policy", {"bin_lengths"});
  read_field(j, "policy", "bin_lengths", bin_lengths);
}

void parse_trainer(const json& j, TrainerConfig& cfg) {
  reject_unknown_keys(j, "trainer",
                      {"eps_low", "eps_high", "learning_rate", "batch_size", "steps",
                       "kl_coeff", "seed", "eps_std", "intra_mode", "checkpoint_every",
                       "log_advantages"});
  read_field(j, "trainer", "eps_low", cfg.eps_low);
  read_field(j, "trainer", "eps_high", cfg.eps_high);
  read_field(j, "trainer", "learning_rate", cfg.learning_rate);
  read_field(j, "trainer", "batch_size", cfg.batch_size);
  read_field(j, "trainer", "steps", cfg.steps);
  read_field(j, "trainer", "kl_coeff", cfg.kl_coeff);
  read_field(j, "trainer", "seed", cfg.seed);
  read_field(j, "trainer", "eps_std", cfg.eps_std);
  read_field(j, "trainer", "checkpoint_every", cfg.checkpoint_every);
  read_field(j, "trainer", "log_advantages", cfg.log_advantages);
  if (j.contains("intra_mode")) {
    const std::string mode = j.at("intra_mode").get<std::string>();
    if (mode == "subgroup_mean")
      cfg.intra_mode = IntraMode::SubgroupMean;
    else if (mode == "per_record")
      cfg.intra_mode = IntraMode::PerRecord;
    else
      throw ConfigError("trainer.intra_mode: expected \"subgroup_mean\" or \"per_record\"");
  }
}

void parse_eval(const json& j, EvalConfig& cfg) {
  reject_unknown_keys(j, "eval", {"n_eval", "seed"});
  read_field(j, "eval", "n_eval", cfg.n_eval);
  read_field(j, "eval", "seed", cfg.seed);
}

}  // namespace

void RunConfig::validate() const {
  reward.validate();
  schedule.validate(reward.l_max);
  env.validate(reward.l_max);
  if (eval.n_eval < 1) throw ConfigError("eval.n_eval: must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir: must be non-empty");

  PolicyParams probe = PolicyParams::zeros(
      env.tiers, policy_bin_lengths.empty() ? default_bin_lengths() : policy_bin_lengths);
  probe.validate(reward.l_max);
  trainer_config().validate();
}

TrainerConfig RunConfig::trainer_config() const {
  TrainerConfig cfg = trainer;
  cfg.reward = reward;
  cfg.schedule = schedule;
  return cfg;
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  reject_unknown_keys(j, "",
                      {"reward", "schedule", "env", "policy", "trainer", "eval", "output_dir"});

  RunConfig cfg;
  if (j.contains("reward")) parse_reward(j.at("reward"), cfg.reward);
  if (j.contains("schedule")) parse_schedule(j.at("schedule"), cfg.schedule);
  if (j.contains("env")) parse_env(j.at("env"), cfg.env);
  if (j.contains("policy")) parse_policy(j.at("policy"), cfg.policy_bin_lengths);
  if (j.contains("trainer")) parse_trainer(j.at("trainer"), cfg.trainer);
  if (j.contains("eval")) parse_eval(j.at("eval"), cfg.eval);
  if (j.contains("output_dir")) read_field(j, "config", "output_dir", cfg.output_dir);

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
  std::vector<int> budgets;
  for (BudgetLevel b : cfg.schedule.budgets) budgets.push_back(b.tokens);
  json j = {
      {"reward",
       {{"beta", cfg.reward.beta}, {"alpha", cfg.reward.alpha}, {"l_max", cfg.reward.l_max}}},
      {"schedule",
       {{"budgets", budgets}, {"rollouts_per_query", cfg.schedule.rollouts_per_query}}},
      {"env",
       {{"tiers", cfg.env.tiers},
        {"required_lengths", cfg.env.required_lengths},
        {"p_floor", cfg.env.p_floor},
        {"p_ceil", cfg.env.p_ceil},
        {"tau", cfg.env.tau},
        {"seed", cfg.env.seed},
        {"n_problems", cfg.env.n_problems}}},
      {"policy",
       {{"bin_lengths",
         cfg.policy_bin_lengths.empty() ? default_bin_lengths() : cfg.policy_bin_lengths}}},
      {"trainer",
       {{"eps_low", cfg.trainer.eps_low},
        {"eps_high", cfg.trainer.eps_high},
        {"learning_rate", cfg.trainer.learning_rate},
        {"batch_size", cfg.trainer.batch_size},
        {"steps", cfg.trainer.steps},
        {"kl_coeff", cfg.trainer.kl_coeff},
        {"seed", cfg.trainer.seed},
        {"eps_std", cfg.trainer.eps_std},
        {"intra_mode",
         cfg.trainer.intra_mode == IntraMode::SubgroupMean ? "subgroup_mean" : "per_record"},
        {"checkpoint_every", cfg.trainer.checkpoint_every},
        {"log_advantages", cfg.trainer.log_advantages}}},
      {"eval", {{"n_eval", cfg.eval.n_eval}, {"seed", cfg.eval.seed}}},
      {"output_dir", cfg.output_dir},
  };
  return j.dump(2) + "\n";
}

std::string default_run_config_json() {
  json j = {
      {"reward", {{"beta", 1.0}, {"alpha", 4e-4}, {"l_max", 4096}}},
      {"schedule", {{"budgets", {512, 1024, 2048, 2560}}, {"rollouts_per_query", 16}}},
      {"env",
       {{"tiers", 3},
        {"required_lengths", {256, 768, 1408}},
        {"p_floor", 0.05},
        {"p_ceil", 0.95},
        {"tau", 48.0},
        {"seed", 0},
        {"n_problems", 256}}},
      {"policy", {{"bin_lengths", {64, 128, 256, 512, 1024, 1536, 2048, 3072}}}},
      {"trainer",
       {{"eps_low", 0.2},
        {"eps_high", 0.28},
        {"learning_rate", 0.6},
        {"batch_size", 32},
        {"steps", 500},
        {"kl_coeff", 0.0},
        {"seed", 0},
        {"eps_std", 1e-8},
        {"intra_mode", "subgroup_mean"},
        {"checkpoint_every", 100},
        {"log_advantages", true}}},
      {"eval", {{"n_eval", 4000}, {"seed", 1000}}},
      {"output_dir", "runs/default"},
  };
  return j.dump(2) + "\n";
}

}  // namespace hbpo
