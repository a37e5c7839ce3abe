#include "hbpo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "hbpo/errors.hpp"

namespace hbpo {

std::vector<int> default_bin_lengths() {
  return {64, 128, 256, 512, 1024, 1536, 2048, 3072};
}

PolicyParams PolicyParams::zeros(int tiers, std::vector<int> bin_lengths) {
  PolicyParams p;
  p.tiers = tiers;
  p.bins = static_cast<int>(bin_lengths.size());
  p.theta_base.assign(static_cast<std::size_t>(tiers) * p.bins, 0.0);
  p.theta_budget.assign(p.bins, 0.0);
  p.bin_lengths = std::move(bin_lengths);
  return p;
}

void PolicyParams::validate(int l_max) const {
  if (tiers < 1) throw ConfigError("policy.tiers: must be >= 1");
  if (bins < 2) throw ConfigError("policy.bin_lengths: need at least 2 bins");
  if (static_cast<int>(bin_lengths.size()) != bins ||
      theta_base.size() != static_cast<std::size_t>(tiers) * bins ||
      theta_budget.size() != static_cast<std::size_t>(bins))
    throw ConfigError("policy: parameter shapes out of sync");
  for (std::size_t i = 0; i < bin_lengths.size(); ++i) {
    if (bin_lengths[i] < 1)
      throw ConfigError("policy.bin_lengths: entries must be >= 1");
    if (bin_lengths[i] > l_max)
      throw ConfigError("policy.bin_lengths: bin " + std::to_string(bin_lengths[i]) +
                        " exceeds reward.l_max=" + std::to_string(l_max));
    if (i > 0 && bin_lengths[i] <= bin_lengths[i - 1])
      throw ConfigError("policy.bin_lengths: must be strictly ascending");
  }
  for (double v : theta_base)
    if (!std::isfinite(v)) throw ConfigError("policy.theta_base: non-finite entry");
  for (double v : theta_budget)
    if (!std::isfinite(v)) throw ConfigError("policy.theta_budget: non-finite entry");
}

namespace {

void check_context(const Context& ctx, const PolicyParams& params) {
  if (ctx.tier < 1 || ctx.tier > params.tiers)
    throw std::domain_error("unknown tier " + std::to_string(ctx.tier));
}

}  // namespace

std::vector<double> logits(const Context& ctx, const PolicyParams& params) {
  check_context(ctx, params);
  std::vector<double> z(params.bins);
  const int row = ctx.tier - 1;
  for (int a = 0; a < params.bins; ++a)
    z[a] = params.base_at(row, a) + params.theta_budget[a] * ctx.budget_feature;
  return z;
}

std::vector<double> log_probs(const Context& ctx, const PolicyParams& params) {
  std::vector<double> z = logits(ctx, params);
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  const double lse = m + std::log(sum);
  for (double& v : z) v -= lse;
  return z;
}

double log_prob(const Context& ctx, int bin, const PolicyParams& params) {
  if (bin < 0 || bin >= params.bins)
    throw std::domain_error("bin " + std::to_string(bin) + " out of range");
  return log_probs(ctx, params)[bin];
}

SampleResult sample(const Context& ctx, const PolicyParams& params, RngState& rng) {
  const std::vector<double> lp = log_probs(ctx, params);
  const double u = rng.next_uniform();
  double cdf = 0.0;
  int chosen = params.bins - 1;
  for (int a = 0; a < params.bins; ++a) {
    cdf += std::exp(lp[a]);
    if (u < cdf) {
      chosen = a;
      break;
    }
  }
  return {chosen, params.bin_lengths[chosen], lp[chosen]};
}

PolicyGrad PolicyGrad::zeros_like(const PolicyParams& params) {
  PolicyGrad g;
  g.theta_base.assign(params.theta_base.size(), 0.0);
  g.theta_budget.assign(params.theta_budget.size(), 0.0);
  return g;
}

void PolicyGrad::scale(double c) {
  for (double& v : theta_base) v *= c;
  for (double& v : theta_budget) v *= c;
}

void PolicyGrad::add_scaled(const PolicyGrad& other, double c) {
  for (std::size_t i = 0; i < theta_base.size(); ++i) theta_base[i] += c * other.theta_base[i];
  for (std::size_t i = 0; i < theta_budget.size(); ++i)
    theta_budget[i] += c * other.theta_budget[i];
}

void accumulate_log_prob_grad(const Context& ctx, int bin, const PolicyParams& params,
                              double weight, PolicyGrad& out) {
  if (bin < 0 || bin >= params.bins)
    throw std::domain_error("bin " + std::to_string(bin) + " out of range");
  const std::vector<double> lp = log_probs(ctx, params);
  const int row = ctx.tier - 1;
  for (int a = 0; a < params.bins; ++a) {
    const double indicator = (a == bin) ? 1.0 : 0.0;
    const double g = indicator - std::exp(lp[a]);
    out.theta_base[static_cast<std::size_t>(row) * params.bins + a] += weight * g;
    out.theta_budget[a] += weight * g * ctx.budget_feature;
  }
}

PolicyGrad grad_log_prob(const Context& ctx, int bin, const PolicyParams& params) {
  PolicyGrad g = PolicyGrad::zeros_like(params);
  accumulate_log_prob_grad(ctx, bin, params, 1.0, g);
  return g;
}

void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path) {
  nlohmann::json arrays = nlohmann::json::array();
  arrays.push_back({{"name", "theta_base"},
                    {"shape", {params.tiers, params.bins}},
                    {"values", params.theta_base}});
  arrays.push_back(
      {{"name", "theta_budget"}, {"shape", {params.bins}}, {"values", params.theta_budget}});
  arrays.push_back(
      {{"name", "bin_lengths"}, {"shape", {params.bins}}, {"values", params.bin_lengths}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << arrays.dump(2) << "\n";
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
  nlohmann::json arrays = nlohmann::json::parse(in);

  auto find = [&](const std::string& name) -> const nlohmann::json& {
    for (const auto& entry : arrays)
      if (entry.at("name") == name) return entry;
    throw std::runtime_error("checkpoint missing array: " + name);
  };

  const auto& base = find("theta_base");
  const auto& budget = find("theta_budget");
  const auto& lengths = find("bin_lengths");

  PolicyParams p;
  p.tiers = base.at("shape").at(0).get<int>();
  p.bins = base.at("shape").at(1).get<int>();
  p.theta_base = base.at("values").get<std::vector<double>>();
  p.theta_budget = budget.at("values").get<std::vector<double>>();
  p.bin_lengths = lengths.at("values").get<std::vector<int>>();
  if (p.theta_base.size() != static_cast<std::size_t>(p.tiers) * p.bins ||
      p.theta_budget.size() != static_cast<std::size_t>(p.bins) ||
      p.bin_lengths.size() != static_cast<std::size_t>(p.bins))
    throw std::runtime_error("checkpoint arrays inconsistent with declared shapes");
  return p;
}

}  // namespace hbpo
