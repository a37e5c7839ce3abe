#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "hbpo/errors.hpp"
#include "hbpo/policy.hpp"

using namespace hbpo;

namespace {

PolicyParams random_params(int tiers, int bins, std::uint64_t seed) {
  std::vector<int> lengths;
  for (int i = 0; i < bins; ++i) lengths.push_back(64 << i);
  PolicyParams p = PolicyParams::zeros(tiers, lengths);
  RngState rng{seed, 0};
  for (double& v : p.theta_base) v = 4.0 * rng.next_uniform() - 2.0;
  for (double& v : p.theta_budget) v = 4.0 * rng.next_uniform() - 2.0;
  return p;
}

}  // namespace

TEST_CASE("zero parameters give a uniform distribution") {
  const PolicyParams p = PolicyParams::zeros(3, default_bin_lengths());
  const Context ctx{1, 0.0};
  for (int a = 0; a < 8; ++a)
    CHECK(log_prob(ctx, a, p) == doctest::Approx(-2.079441541679836).epsilon(1e-12));
}

TEST_CASE("logits equal the base row under natural inference") {
  PolicyParams p = random_params(3, 8, 21);
  const Context ctx{2, 0.0};
  const auto z = logits(ctx, p);
  for (int a = 0; a < 8; ++a) CHECK(z[a] == p.base_at(1, a));
}

TEST_CASE("budget feature scales the interaction term linearly") {
  const PolicyParams p = random_params(2, 6, 22);
  const auto z_full = logits({1, 1.0}, p);
  const auto z_eighth = logits({1, 0.125}, p);
  for (int a = 0; a < 6; ++a)
    CHECK(z_full[a] - z_eighth[a] == doctest::Approx(0.875 * p.theta_budget[a]).epsilon(1e-12));
}

TEST_CASE("extreme logits neither overflow nor lose normalization") {
  PolicyParams p = PolicyParams::zeros(1, {64, 128, 256, 512});
  p.base_at(0, 2) = 1000.0;
  const double lp = log_prob({1, 0.0}, 2, p);
  CHECK(std::isfinite(lp));
  CHECK(lp <= 0.0);
  CHECK(lp > -1e-12);
}

TEST_CASE("probabilities sum to one for random parameters") {
  for (int trial = 0; trial < 50; ++trial) {
    const PolicyParams p = random_params(3, 8, 100 + trial);
    for (double feature : {-1.0, 0.0, 0.37, 1.0}) {
      const auto lp = log_probs({1 + trial % 3, feature}, p);
      double sum = 0.0;
      for (double v : lp) sum += std::exp(v);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("grad_log_prob identities") {
  const PolicyParams two_bins = PolicyParams::zeros(1, {64, 128});
  const PolicyGrad g = grad_log_prob({1, 0.0}, 0, two_bins);
  CHECK(g.theta_base[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.theta_base[1] == doctest::Approx(-0.5).epsilon(1e-15));

  for (int trial = 0; trial < 30; ++trial) {
    const PolicyParams p = random_params(3, 8, 300 + trial);
    const Context ctx{1 + trial % 3, trial % 2 ? 0.625 : -1.0};
    const int action = trial % 8;
    const PolicyGrad grad = grad_log_prob(ctx, action, p);

    // Softmax gradient sums to zero along the active tier row.
    double row_sum = 0.0;
    const int row = ctx.tier - 1;
    for (int a = 0; a < 8; ++a) row_sum += grad.theta_base[row * 8 + a];
    CHECK(row_sum == doctest::Approx(0.0).epsilon(1e-12));

    // Inactive tiers receive exactly nothing.
    for (int r = 0; r < 3; ++r) {
      if (r == row) continue;
      for (int a = 0; a < 8; ++a) CHECK(grad.theta_base[r * 8 + a] == 0.0);
    }

    // The budget gradient is the base row scaled by the feature.
    for (int a = 0; a < 8; ++a)
      CHECK(grad.theta_budget[a] ==
            doctest::Approx(grad.theta_base[row * 8 + a] * ctx.budget_feature).epsilon(1e-12));
  }
}

TEST_CASE("grad_log_prob matches central finite differences") {
  const double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    PolicyParams p = random_params(3, 6, 500 + trial);
    const Context ctx{1 + trial % 3, (trial % 4) * 0.25 - 0.25};
    const int action = trial % 6;
    const PolicyGrad grad = grad_log_prob(ctx, action, p);

    for (std::size_t i = 0; i < p.theta_base.size(); ++i) {
      const double saved = p.theta_base[i];
      p.theta_base[i] = saved + h;
      const double up = log_prob(ctx, action, p);
      p.theta_base[i] = saved - h;
      const double down = log_prob(ctx, action, p);
      p.theta_base[i] = saved;
      const double fd = (up - down) / (2 * h);
      const double rel = std::abs(grad.theta_base[i] - fd) /
                         std::max({1e-8, std::abs(grad.theta_base[i]), std::abs(fd)});
      worst = std::max(worst, rel);
    }
    for (std::size_t i = 0; i < p.theta_budget.size(); ++i) {
      const double saved = p.theta_budget[i];
      p.theta_budget[i] = saved + h;
      const double up = log_prob(ctx, action, p);
      p.theta_budget[i] = saved - h;
      const double down = log_prob(ctx, action, p);
      p.theta_budget[i] = saved;
      const double fd = (up - down) / (2 * h);
      const double rel = std::abs(grad.theta_budget[i] - fd) /
                         std::max({1e-8, std::abs(grad.theta_budget[i]), std::abs(fd)});
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("sampling follows the distribution and the counter") {
  PolicyParams p = PolicyParams::zeros(1, {64, 128, 256, 512});

  SUBCASE("degenerate one-hot") {
    p.base_at(0, 3) = 1000.0;
    RngState rng{1, 0};
    for (int i = 0; i < 200; ++i) {
      const SampleResult s = sample({1, 0.0}, p, rng);
      CHECK(s.bin == 3);
      CHECK(s.n_gen == 512);
    }
  }

  SUBCASE("uniform frequencies within 3 standard errors") {
    const int draws = 100000;
    int counts[4] = {0, 0, 0, 0};
    RngState rng{123, 0};
    for (int i = 0; i < draws; ++i) counts[sample({1, 0.0}, p, rng).bin]++;
    const double se = std::sqrt(0.25 * 0.75 / draws);
    for (int a = 0; a < 4; ++a)
      CHECK(std::abs(counts[a] / static_cast<double>(draws) - 0.25) <= 3.0 * se);
  }

  SUBCASE("identical seed and counter give identical trajectories") {
    const PolicyParams q = random_params(2, 5, 777);
    RngState a{9, 100};
    RngState b{9, 100};
    for (int i = 0; i < 500; ++i) {
      const SampleResult sa = sample({1 + i % 2, 0.25}, q, a);
      const SampleResult sb = sample({1 + i % 2, 0.25}, q, b);
      CHECK(sa.bin == sb.bin);
      CHECK(sa.log_prob == sb.log_prob);
    }
  }
}

TEST_CASE("checkpoint round trip") {
  const PolicyParams p = random_params(3, 8, 42);
  const auto path = std::filesystem::temp_directory_path() / "hbpo_test_ckpt.json";
  save_checkpoint(p, path);
  const PolicyParams q = load_checkpoint(path);
  CHECK(q.tiers == p.tiers);
  CHECK(q.bins == p.bins);
  CHECK(q.theta_base == p.theta_base);
  CHECK(q.theta_budget == p.theta_budget);
  CHECK(q.bin_lengths == p.bin_lengths);
  std::filesystem::remove(path);

  CHECK_THROWS(load_checkpoint("/nonexistent/ckpt.json"));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(PolicyParams::zeros(3, {64}).validate(4096), ConfigError);

  PolicyParams bad = PolicyParams::zeros(3, {64, 32});
  CHECK_THROWS_AS(bad.validate(4096), ConfigError);

  PolicyParams too_long = PolicyParams::zeros(3, {64, 8192});
  CHECK_THROWS_WITH_AS(too_long.validate(4096), doctest::Contains("bin_lengths"), ConfigError);

  PolicyParams nan_params = PolicyParams::zeros(2, {64, 128});
  nan_params.theta_base[1] = std::nan("");
  CHECK_THROWS_AS(nan_params.validate(4096), ConfigError);

  const PolicyParams p = PolicyParams::zeros(2, {64, 128});
  CHECK_THROWS_AS(logits({5, 0.0}, p), std::domain_error);
  CHECK_THROWS_AS(logits({0, 0.0}, p), std::domain_error);
  CHECK_THROWS_AS(log_prob({1, 0.0}, 2, p), std::domain_error);
}
