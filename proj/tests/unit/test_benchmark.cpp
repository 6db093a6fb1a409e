#include "scfo/benchmark.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

using namespace scfo;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

double g1(const Vector& u) { return -6 * u(0) * u(0) - 3.5 * u(0) + u(1) - 0.6; }
double g2(const Vector& u) { return 2 * u(0) * u(0) + 0.5 * u(0) + u(1) - 0.75; }
double g3(const Vector& u) { return -u(0) * u(0) - (u(1) - 0.15) * (u(1) - 0.15) + 0.01; }

// Minimum of cost along the curve u2 = curve(u1) by golden-section search.
template <typename Cost, typename Curve>
Vector curve_minimum(Cost cost, Curve curve, double a, double b) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  auto f = [&](double x) { return cost(vec({x, curve(x)})); };
  double c = b - r * (b - a), d = a + r * (b - a);
  while (b - a > 1e-13) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  const double x = 0.5 * (a + b);
  return vec({x, curve(x)});
}

PlantOptimum reference_optimum(std::function<double(const Vector&)> cost, const InputBox& box) {
  auto feasible = [](const Vector& u) { return g1(u) <= 0 && g2(u) <= 0 && g3(u) <= 0; };
  double v = 0.0;
  const Vector grid = oracle::grid_minimum_2d(box, 801, cost, feasible, &v);
  // polish on whichever constraint the grid point sits next to
  Vector best = grid;
  double best_v = v;
  auto try_curve = [&](auto curve) {
    const Vector u = curve_minimum(cost, curve, grid(0) - 0.01, grid(0) + 0.01);
    if (box.contains(u, 1e-12) && g1(u) <= 1e-12 && g2(u) <= 1e-12 && g3(u) <= 1e-12 && cost(u) < best_v) {
      best = u;
      best_v = cost(u);
    }
  };
  try_curve([](double x) { return 0.75 - 2 * x * x - 0.5 * x; });
  try_curve([](double x) { return 0.6 + 6 * x * x + 3.5 * x; });
  return {best, best_v};
}

}  // namespace

TEST_CASE("benchmark definitions") {
  const ProblemDefinition a = benchmark_definition("A");
  const ProblemDefinition b = benchmark_definition("B");
  CHECK(a.u0 == vec({-0.5, 0.05}));
  CHECK(b.u0 == vec({0.0, 0.4}));
  CHECK(a.k_f == 1000);
  CHECK(b.k_f == 100);
  CHECK(a.box.lo == vec({-0.5, 0.0}));
  CHECK(a.box.hi == vec({0.5, 0.8}));
  CHECK_THROWS(benchmark_definition("C"));

  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const Vector u = vec({0, 0.4}) + oracle::uniform_vector(rng, 2, -0.5, 0.4).cwiseProduct(vec({1, 1}));
    const Vector uc = a.box.clip(u);
    CHECK(a.constraints[0].value(uc) == doctest::Approx(g1(uc)));
    CHECK(a.constraints[1].value(uc) == doctest::Approx(g2(uc)));
    CHECK(a.constraints[2].value(uc) == doctest::Approx(g3(uc)));
    CHECK(a.cost_phases[0].cost.value(uc) ==
          doctest::Approx(std::pow(uc(0) - 0.5, 2) + std::pow(uc(1) - 0.4, 2)));
  }
  const ProblemDefinition c = benchmark_definition("B-changing");
  REQUIRE(c.cost_phases.size() == 2);
  CHECK(c.cost_phases[1].start_iteration == 50);
  CHECK(c.cost_phases[1].cost.value(vec({0.1, 0.2})) ==
        doctest::Approx(std::pow(0.35, 2) + std::pow(-0.4, 2)));
}

TEST_CASE("derived Lipschitz constants and ranges") {
  const RtoProblem& p = benchmark_problem("A");
  Matrix expect(3, 2);
  expect << 9.5, 1.0, 2.5, 1.0, 1.0, 1.3;
  CHECK((p.lipschitz.kappa_hi - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((p.lipschitz.kappa_lo + expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(p.cost_kappa == vec({2.2, 0.35}));

  for (int j = 0; j < 3; ++j) {
    double mx = 0.0;
    for (int a = 0; a <= 400; ++a) {
      for (int b = 0; b <= 400; ++b) {
        const Vector u = vec({-0.5 + a / 400.0, 0.8 * b / 400.0});
        mx = std::max(mx, std::abs(p.constraints[j].value(u)));
      }
    }
    CHECK(p.constraint_ranges(j) == doctest::Approx(mx).epsilon(1e-3));
  }

  std::mt19937_64 rng(2);
  for (int t = 0; t < 2000; ++t) {
    const Vector u = p.box.clip(oracle::uniform_vector(rng, 2, -0.5, 0.8));
    const Vector w = p.box.clip(oracle::uniform_vector(rng, 2, -0.5, 0.8));
    for (int j = 0; j < 3; ++j) {
      CHECK(p.constraints[j].value(w) - p.constraints[j].value(u) <= lipschitz_growth(p.lipschitz, j, w - u) + 1e-12);
    }
  }
}

TEST_CASE("plant optimum matches an independent search") {
  const RtoProblem& p = benchmark_problem("B");
  const PlantOptimum ref = reference_optimum(
      [](const Vector& u) { return std::pow(u(0) - 0.5, 2) + std::pow(u(1) - 0.4, 2); }, p.box);
  CHECK(p.optima[0].phi == doctest::Approx(ref.phi).epsilon(1e-9));
  CHECK((p.optima[0].u - ref.u).norm() < 1e-6);
  CHECK(benchmark_problem("A").optima[0].phi == doctest::Approx(ref.phi).epsilon(1e-12));

  const RtoProblem& c = benchmark_problem("B-changing");
  const PlantOptimum ref2 = reference_optimum(
      [](const Vector& u) { return std::pow(u(0) + 0.25, 2) + std::pow(u(1) - 0.6, 2); }, c.box);
  REQUIRE(c.optima.size() == 2);
  CHECK(c.optima[1].phi == doctest::Approx(ref2.phi).epsilon(1e-9));
  CHECK((c.optima[1].u - ref2.u).norm() < 1e-6);
  CHECK(c.phase_index(49) == 0);
  CHECK(c.phase_index(50) == 1);
}

TEST_CASE("infeasible starting points are rejected") {
  ProblemDefinition d = benchmark_definition("B");
  d.u0 = vec({0.5, 0.8});
  CHECK_THROWS(build_problem(d));
}

TEST_CASE("cells apply known elements and concavity") {
  ExperimentCell cell;
  cell.problem = "A";
  cell.known = {"phi", "g3"};
  cell.concave = {{0, 1}};
  const RtoProblem p = cell_problem(cell);
  CHECK(p.known_cost);
  CHECK(p.is_known(2));
  CHECK_FALSE(p.is_known(0));
  CHECK(p.lipschitz.concave_in(0, 1));
  CHECK_FALSE(p.lipschitz.concave_in(0, 0));
  ExperimentCell bad = cell;
  bad.known = {"g7"};
  CHECK_THROWS(cell_problem(bad));

  ExperimentCell soft;
  soft.slack_l = 0.05;
  const RtoProblem ps = cell_problem(soft);
  const CampaignConfig cfg = cell_config(soft, ps);
  REQUIRE(cfg.slack.has_value());
  CHECK(cfg.slack->d0(1) == doctest::Approx(0.05 * ps.constraint_ranges(1)));
  CHECK(cfg.slack->d_total(1) == doctest::Approx(0.5 * ps.constraint_ranges(1)));
}

TEST_CASE("presets") {
  CHECK(preset_grid("table1").size() == 50);
  CHECK(preset_grid("table2").size() == 50);
  CHECK(preset_grid("table5").size() == 4);
  CHECK(preset_grid("table6").size() == 2);
  CHECK(preset_grid("table7").size() == 8);
  CHECK(preset_grid("table8").size() == 7);
  std::set<std::string> labels;
  for (const auto& c : preset_grid("table3")) labels.insert(c.label);
  CHECK(labels.size() == 20);
  CHECK_THROWS(preset_grid("table9"));
}

TEST_CASE("seeds and summaries") {
  std::set<std::uint64_t> seeds;
  for (int c = 0; c < 10; ++c) {
    for (int r = 0; r < 10; ++r) seeds.insert(replicate_seed(1, c, r));
  }
  CHECK(seeds.size() == 100);
  CHECK(replicate_seed(1, 2, 3) == replicate_seed(1, 2, 3));
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS(median({}));

  CampaignTrace t;
  for (double g : {-1.0, 0.5, 0.25}) {
    TraceRecord r;
    r.g_true = vec({g, -g});
    t.records.push_back(r);
  }
  const auto vi = violation_integrals(t);
  CHECK(vi[0] == doctest::Approx(0.75));
  CHECK(vi[1] == doctest::Approx(1.0));
}

TEST_CASE("experiment writes one trace per replicate") {
  const auto dir = std::filesystem::temp_directory_path() / "scfo_test_experiment";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  ExperimentCell cell;
  cell.label = "B-GD";
  cell.problem = "B";
  cell.config.algorithm.kind = AlgorithmKind::GradientDescent;
  cell.config.impl = Implementation::II;
  cell.config.sigma = 0.1;
  cell.config.k_f = 20;
  const ExperimentSummary s = run_experiment(cell, 3, dir.string(), 1, 0);
  CHECK(s.replicates == 3);
  CHECK(s.losses.size() == 3);
  CHECK(s.violations == 0);
  CHECK(std::filesystem::exists(dir / "B-GD_r0.csv"));
  CHECK(std::filesystem::exists(dir / "B-GD_r2.csv"));
  CHECK(s.median_loss == doctest::Approx(median(s.losses)));
  std::filesystem::remove_all(dir);
}
