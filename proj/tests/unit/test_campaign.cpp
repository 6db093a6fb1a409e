#include "scfo/benchmark.hpp"
#include "scfo/campaign.hpp"
#include "scfo/trace_csv.hpp"

#include <doctest.h>

#include <cmath>

using namespace scfo;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("gradient noise") {
  std::mt19937_64 rng(1);
  CHECK(inject_gradient_noise(vec({1, 2}), vec({2.2, 0.35}), 0.0, rng) == vec({1, 2}));
  const Vector g = vec({0.3, -0.7});
  const Vector kappa = vec({2.2, 0.35});
  Vector sum = Vector::Zero(2);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Vector d = inject_gradient_noise(g, kappa, 0.5, rng) - g;
    CHECK(std::abs(d(0)) <= 1.1);
    CHECK(std::abs(d(1)) <= 0.175);
    sum += d;
  }
  // uniform on [-a, a] has standard deviation a / sqrt(3)
  const Vector se = vec({1.1, 0.175}) / std::sqrt(3.0 * n);
  CHECK(std::abs(sum(0) / n) <= 3 * se(0));
  CHECK(std::abs(sum(1) / n) <= 3 * se(1));
  CHECK_THROWS(inject_gradient_noise(g, kappa, -1.0, rng));
}

TEST_CASE("constraint noise coverage") {
  std::mt19937_64 rng(2);
  const Vector eps_bar = vec({1.0, 2.0, 0.5});
  CHECK(inject_constraint_noise(vec({1, 2, 3}), 0.0, eps_bar, rng) == vec({1, 2, 3}));
  const NoiseModel nm = NoiseModel::gaussian(eps_bar, 0.02);
  const int n = 1000000;
  long covered = 0;
  for (int i = 0; i < n; ++i) {
    const Vector w = inject_constraint_noise(Vector::Zero(3), 0.02, eps_bar, rng);
    covered += w(1) >= nm.w_lo(1);
  }
  const double rate = static_cast<double>(covered) / n;
  // P(Z >= -3) = 0.99865
  CHECK(rate == doctest::Approx(0.99865).epsilon(3e-4));

  std::mt19937_64 r2(3);
  for (int i = 0; i < 10000; ++i) {
    const Vector w = inject_constraint_noise(Vector::Zero(3), 0.02, eps_bar, r2, 3.0);
    CHECK((w.array() >= nm.w_lo.array() - 1e-15).all());
  }
}

TEST_CASE("averaged noise bound follows the square-root law") {
  const NoiseModel nm = NoiseModel::gaussian(vec({1.0}), 0.02);
  CHECK(nm.mean_lower_bound(0, 4) == doctest::Approx(0.5 * nm.w_lo(0)));
  std::mt19937_64 rng(4);
  const int n = 200000;
  long covered = 0;
  for (int i = 0; i < n; ++i) {
    double mean = 0.0;
    for (int r = 0; r < 4; ++r) mean += inject_constraint_noise(Vector::Zero(1), 0.02, vec({1.0}), rng)(0);
    covered += mean / 4 >= nm.mean_lower_bound(0, 4);
  }
  CHECK(static_cast<double>(covered) / n == doctest::Approx(0.99865).epsilon(1e-3));
}

TEST_CASE("streams are independent per purpose") {
  NoiseStreams a(5), b(5), c(6);
  CHECK(a.gradient()() == b.gradient()());
  CHECK(a.gradient()() != a.constraint()());
  CHECK(b.algorithm()() != c.algorithm()());
}

TEST_CASE("zero-length campaign") {
  const RtoProblem& p = benchmark_problem("B");
  CampaignConfig cfg;
  cfg.k_f = 0;
  const CampaignTrace t = run_campaign(p, cfg);
  REQUIRE(t.records.size() == 1);
  CHECK(t.records[0].u == p.u0);
  CHECK(t.records[0].K == 0.0);
}

TEST_CASE("nominal ideal-target campaign on B") {
  const RtoProblem& p = benchmark_problem("B");
  CampaignConfig cfg;
  cfg.k_f = 100;
  const CampaignTrace t = run_campaign(p, cfg);
  REQUIRE(t.records.size() == 101);
  for (std::size_t k = 0; k < t.records.size(); ++k) {
    CHECK((t.records[k].g_true.array() <= 1e-9).all());
    if (k > 0) CHECK(t.records[k].phi_true <= t.records[k - 1].phi_true + 1e-12);
  }
  CHECK((t.records.back().u - p.optima[0].u).norm() < 0.05);
  CHECK(optimality_loss(t) > 0.0);
}

TEST_CASE("campaigns are deterministic") {
  const RtoProblem& p = benchmark_problem("B");
  CampaignConfig cfg;
  cfg.k_f = 40;
  cfg.algorithm.kind = AlgorithmKind::RandomStep;
  cfg.impl = Implementation::III;
  cfg.sigma = 0.3;
  cfg.sigma_g = 0.01;
  cfg.seed = 77;
  CHECK(trace_to_csv(run_campaign(p, cfg)) == trace_to_csv(run_campaign(p, cfg)));
  CampaignConfig other = cfg;
  other.seed = 78;
  CHECK(trace_to_csv(run_campaign(p, cfg)) != trace_to_csv(run_campaign(p, other)));
}

TEST_CASE("real-plant mode records no truth") {
  const RtoProblem& p = benchmark_problem("B");
  CampaignConfig cfg;
  cfg.k_f = 5;
  cfg.real_plant_mode = true;
  const CampaignTrace t = run_campaign(p, cfg);
  CHECK_FALSE(t.has_truth());
  CHECK_THROWS(optimality_loss(t));
}

TEST_CASE("implementations") {
  CHECK(parse_implementation("III") == Implementation::III);
  CHECK(parse_implementation("4") == Implementation::IV);
  CHECK_THROWS(parse_implementation("V"));
  CampaignConfig cfg;
  cfg.sigma = -1.0;
  CHECK_THROWS(run_campaign(benchmark_problem("B"), cfg));
}
