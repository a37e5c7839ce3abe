#include "hbpo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "hbpo/errors.hpp"

namespace hbpo {

void TrainerConfig::validate() const {
  if (!(eps_low > 0.0 && eps_low < 1.0))
    throw ConfigError("trainer.eps_low: must be in (0, 1)");
  if (!(eps_high > 0.0 && eps_high < 1.0))
    throw ConfigError("trainer.eps_high: must be in (0, 1)");
  if (!(learning_rate > 0.0)) throw ConfigError("trainer.learning_rate: must be > 0");
  if (batch_size < 1) throw ConfigError("trainer.batch_size: must be >= 1");
  if (steps < 1) throw ConfigError("trainer.steps: must be >= 1");
  if (kl_coeff != 0.0)
    throw ConfigError("trainer.kl_coeff: KL regularization is disabled; must be 0");
  if (!(eps_std > 0.0)) throw ConfigError("trainer.eps_std: must be > 0");
  if (checkpoint_every < 1) throw ConfigError("trainer.checkpoint_every: must be >= 1");
  reward.validate();
  schedule.validate(reward.l_max);
}

double clipped_loss_term(double rho, double advantage, const TrainerConfig& cfg) {
  if (!std::isfinite(rho) || !std::isfinite(advantage))
    throw NumericError("clipped_loss_term: non-finite input");
  if (!(rho > 0.0)) throw NumericError("clipped_loss_term: rho must be > 0");
  const double clipped = std::clamp(rho, 1.0 - cfg.eps_low, 1.0 + cfg.eps_high);
  return -std::min(rho * advantage, clipped * advantage);
}

namespace {

// Per-sample loss plus, when the unclipped branch is active, the gradient
// contribution -A * rho * grad log pi accumulated into grad_sum.
double add_surrogate_term(const FrozenSample& s, const PolicyParams& params,
                          const TrainerConfig& cfg, PolicyGrad* grad_sum) {
  const double lp_new = log_prob(s.ctx, s.bin, params);
  const double rho = std::exp(lp_new - s.old_logprob);
  const double term = clipped_loss_term(rho, s.advantage, cfg);
  if (grad_sum != nullptr) {
    const double clipped = std::clamp(rho, 1.0 - cfg.eps_low, 1.0 + cfg.eps_high);
    if (rho * s.advantage <= clipped * s.advantage)
      accumulate_log_prob_grad(s.ctx, s.bin, params, -s.advantage * rho, *grad_sum);
  }
  return term;
}

void parallel_for(int n_items, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n_items));
  if (threads == 1) {
    for (int i = 0; i < n_items; ++i) body(i);
    return;
  }
  std::mutex mu;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n_items; i += threads) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct QueryWork {
  QueryTrace trace;
  std::vector<FrozenSample> samples;
  PolicyGrad grad_sum;
  double loss_sum = 0.0;
};

}  // namespace

StepReport train_step(PolicyParams& policy, const std::vector<Problem>& dataset,
                      const EnvConfig& env, const TrainerConfig& cfg, int step_index,
                      int threads, std::vector<QueryTrace>* traces) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("train_step: empty dataset");

  const int n = cfg.schedule.rollouts_per_query;
  const auto slots = partition(cfg.schedule);
  // Counter layout per query: one dataset pick, then a (policy, outcome)
  // pair per slot. Fixed offsets keep every draw independent of scheduling.
  const std::uint64_t draws_per_query = 1 + 2ULL * n;

  std::vector<QueryWork> work(static_cast<std::size_t>(cfg.batch_size));
  parallel_for(cfg.batch_size, threads, [&](int qi) {
    QueryWork& w = work[qi];
    const std::uint64_t base =
        (static_cast<std::uint64_t>(step_index) * cfg.batch_size + qi) * draws_per_query;

    const double pick = uniform01(cfg.seed, base);
    const Problem& problem =
        dataset[std::min(dataset.size() - 1,
                         static_cast<std::size_t>(pick * dataset.size()))];

    w.trace.batch.query_id =
        std::to_string(step_index) + ":" + std::to_string(qi) + ":" + std::to_string(problem.id);
    w.trace.batch.schedule = cfg.schedule;
    w.trace.batch.records.reserve(static_cast<std::size_t>(n));
    w.samples.reserve(static_cast<std::size_t>(n));

    for (int s = 0; s < n; ++s) {
      const auto [sub, budget] = slots[s];
      const Context ctx{problem.tier,
                        static_cast<double>(budget.tokens) / cfg.reward.l_max};
      RngState policy_rng{cfg.seed, base + 1 + 2ULL * s};
      const SampleResult draw = sample(ctx, policy, policy_rng);
      RngState outcome_rng{cfg.seed, base + 2 + 2ULL * s};
      const bool correct = sample_outcome(draw.n_gen, problem, env, outcome_rng);
      const RewardOutcome r = reward(draw.n_gen, correct, budget, cfg.reward);
      w.trace.batch.records.push_back(
          {sub, budget, draw.n_gen, correct, r.value, draw.log_prob});
      w.samples.push_back({ctx, draw.bin, draw.log_prob, 0.0});
    }

    w.trace.advantages = compute_advantages(w.trace.batch, cfg.reward, cfg.eps_std,
                                            cfg.intra_mode);
    for (int s = 0; s < n; ++s) w.samples[s].advantage = w.trace.advantages.combined[s];

    w.grad_sum = PolicyGrad::zeros_like(policy);
    for (const FrozenSample& sample : w.samples)
      w.loss_sum += add_surrogate_term(sample, policy, cfg, &w.grad_sum);
  });

  // Sequential reduction in query order keeps floating-point results
  // independent of the thread count.
  const int total = cfg.batch_size * n;
  PolicyGrad grad = PolicyGrad::zeros_like(policy);
  double loss_sum = 0.0;
  double reward_sum = 0.0;
  double len_sum = 0.0;
  double len_sq_sum = 0.0;
  int correct_count = 0;
  std::vector<double> tier_len_sum(static_cast<std::size_t>(env.tiers), 0.0);
  std::vector<int> tier_count(static_cast<std::size_t>(env.tiers), 0);

  for (QueryWork& w : work) {
    grad.add_scaled(w.grad_sum, 1.0);
    loss_sum += w.loss_sum;
    const int tier = w.samples.front().ctx.tier;
    for (const RolloutRecord& r : w.trace.batch.records) {
      reward_sum += r.reward;
      len_sum += r.n_gen;
      len_sq_sum += static_cast<double>(r.n_gen) * r.n_gen;
      correct_count += r.correct ? 1 : 0;
      tier_len_sum[tier - 1] += r.n_gen;
      tier_count[tier - 1] += 1;
    }
    if (traces != nullptr) traces->push_back(std::move(w.trace));
  }

  // Gradient descent on the mean surrogate: theta -= lr * grad / total.
  const double scale = -cfg.learning_rate / total;
  for (std::size_t i = 0; i < policy.theta_base.size(); ++i)
    policy.theta_base[i] += scale * grad.theta_base[i];
  for (std::size_t i = 0; i < policy.theta_budget.size(); ++i)
    policy.theta_budget[i] += scale * grad.theta_budget[i];

  StepReport report;
  report.step = step_index;
  report.mean_reward = reward_sum / total;
  report.mean_length = len_sum / total;
  report.std_length =
      std::sqrt(std::max(0.0, len_sq_sum / total - report.mean_length * report.mean_length));
  report.per_tier_mean_length.resize(static_cast<std::size_t>(env.tiers), 0.0);
  for (int d = 0; d < env.tiers; ++d)
    if (tier_count[d] > 0) report.per_tier_mean_length[d] = tier_len_sum[d] / tier_count[d];
  report.loss = loss_sum / total;
  report.accuracy = static_cast<double>(correct_count) / total;
  return report;
}

double surrogate_loss(const std::vector<FrozenSample>& samples, const PolicyParams& params,
                      const TrainerConfig& cfg) {
  if (samples.empty()) throw std::invalid_argument("surrogate_loss: no samples");
  double sum = 0.0;
  for (const FrozenSample& s : samples) sum += add_surrogate_term(s, params, cfg, nullptr);
  return sum / static_cast<double>(samples.size());
}

PolicyGrad surrogate_gradient(const std::vector<FrozenSample>& samples,
                              const PolicyParams& params, const TrainerConfig& cfg) {
  if (samples.empty()) throw std::invalid_argument("surrogate_gradient: no samples");
  PolicyGrad grad = PolicyGrad::zeros_like(params);
  for (const FrozenSample& s : samples) add_surrogate_term(s, params, cfg, &grad);
  grad.scale(1.0 / static_cast<double>(samples.size()));
  return grad;
}

TrainResult train(const PolicyParams& init, const EnvConfig& env, const TrainerConfig& cfg,
                  int threads, const StepSink& sink) {
  cfg.validate();
  env.validate(cfg.reward.l_max);
  init.validate(cfg.reward.l_max);
  if (env.tiers != init.tiers)
    throw ConfigError("policy: tier count does not match env.tiers");

  RngState dataset_rng{env.seed, 0};
  const std::vector<Problem> dataset = make_dataset(env.n_problems, env, dataset_rng);

  TrainResult result{init, {}};
  result.reports.reserve(static_cast<std::size_t>(cfg.steps));
  for (int t = 0; t < cfg.steps; ++t) {
    std::vector<QueryTrace> traces;
    std::vector<QueryTrace>* trace_ptr = sink ? &traces : nullptr;
    StepReport report;
    try {
      report = train_step(result.policy, dataset, env, cfg, t, threads, trace_ptr);
    } catch (const std::exception& e) {
      throw std::runtime_error("train: step " + std::to_string(t) + ": " + e.what());
    }
    if (sink) sink(report, traces);
    result.reports.push_back(std::move(report));
  }
  return result;
}

}  // namespace hbpo
