#include "scfo/benchmark.hpp"
#include "scfo/dense_qp.hpp"
#include "scfo/projection.hpp"
#include "scfo/supervisor.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace scfo;

namespace {

Vector random_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = U(rng);
  return v;
}

void BM_ProjectPoint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  const Vector z = random_vector(rng, n, -1, 1);
  LinearSystem sys = LinearSystem::empty(n);
  for (int i = 0; i < 3 * n; ++i) {
    const Vector a = random_vector(rng, n, -1, 1);
    sys.add_row(a, a.dot(z) + 0.1);
  }
  const Vector x0 = random_vector(rng, n, -3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(project_point(x0, sys));
}
BENCHMARK(BM_ProjectPoint)->Arg(2)->Arg(4)->Arg(8);

void BM_RobustProjection(benchmark::State& state) {
  const RtoProblem& p = benchmark_problem("A");
  std::vector<GradientBox> boxes;
  for (int j = 0; j < p.n_g; ++j) {
    boxes.push_back(build_gradient_box(p.constraint_gradient(j, p.u0), p.lipschitz.kappa_hi.row(j).transpose(), 0.1));
  }
  const GradientBox cost = build_gradient_box(p.cost_gradient(p.u0, 0), p.cost_kappa, 0.1);
  const ProjectionParams params = ProjectionParams::from_ranges(p.constraint_ranges, p.cost_range);
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_robust(p.optima[0].u, p.u0, cost, boxes, {0, 1, 2}, params, p.box));
  }
}
BENCHMARK(BM_RobustProjection);

void BM_Campaign(benchmark::State& state) {
  const RtoProblem& p = benchmark_problem("B");
  CampaignConfig cfg;
  cfg.algorithm.kind = AlgorithmKind::GradientDescent;
  cfg.impl = Implementation::III;
  cfg.sigma = 0.1;
  cfg.k_f = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_campaign(p, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Campaign)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
