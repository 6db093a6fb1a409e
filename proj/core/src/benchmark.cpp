#include "scfo/benchmark.hpp"

#include "scfo/trace_csv.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>

namespace scfo {

namespace {

Polynomial poly2(std::initializer_list<std::tuple<double, int, int>> terms) {
  std::vector<Monomial> out;
  for (const auto& [c, p1, p2] : terms) out.push_back({c, {p1, p2}});
  return Polynomial(2, std::move(out));
}

ScalarFunction as_function(const Polynomial& p) {
  return {[p](const Vector& u) { return p.value(u); }, [p](const Vector& u) { return p.gradient(u); }};
}

bool is_convex_quadratic(const Polynomial& p) {
  if (p.degree() > 2) return false;
  const Matrix H = p.hessian(Vector::Zero(p.n_vars()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  return es.eigenvalues().minCoeff() >= -1e-12;
}

// Visits every point of a regular grid with `counts[i]` values along input i.
template <typename F>
void for_each_grid_point(const InputBox& box, const std::vector<int>& counts, F&& f) {
  const int n = box.size();
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Vector u(n);
  while (true) {
    for (int i = 0; i < n; ++i) {
      const double t = counts[i] > 1 ? static_cast<double>(idx[i]) / (counts[i] - 1) : 0.5;
      u(i) = idx[i] == counts[i] - 1 ? box.hi(i) : box.lo(i) + t * (box.hi(i) - box.lo(i));
    }
    f(u);
    int d = 0;
    while (d < n && ++idx[d] == counts[d]) idx[d++] = 0;
    if (d == n) return;
  }
}

Matrix cost_q_bound(const std::vector<PolynomialPhase>& phases, const InputBox& box) {
  const int n = box.size();
  double lam = 0.0;
  bool all_quadratic = true;
  for (const auto& ph : phases) all_quadratic = all_quadratic && ph.cost.degree() <= 2;
  if (all_quadratic) {
    Matrix H = phases.front().cost.hessian(Vector::Zero(n));
    bool same = true;
    for (const auto& ph : phases) same = same && ph.cost.hessian(Vector::Zero(n)).isApprox(H);
    if (same) return H;
  }
  const int per_dim = std::max(2, static_cast<int>(std::pow(4000.0, 1.0 / n)));
  for (const auto& ph : phases) {
    for_each_grid_point(box, std::vector<int>(static_cast<std::size_t>(n), per_dim), [&](const Vector& u) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(ph.cost.hessian(u));
      lam = std::max(lam, es.eigenvalues().maxCoeff());
    });
  }
  return std::max(lam, 1e-6) * Matrix::Identity(n, n);
}

struct LinearConstraint {
  Vector a;
  double b;  // a'u - b <= 0
};

}  // namespace

ProblemDefinition benchmark_definition(const std::string& name) {
  ProblemDefinition d;
  d.n_u = 2;
  d.box = {Vector(2), Vector(2)};
  d.box.lo << -0.5, 0.0;
  d.box.hi << 0.5, 0.8;
  const Polynomial cost = poly2({{1.0, 2, 0}, {-1.0, 1, 0}, {1.0, 0, 2}, {-0.8, 0, 1}, {0.41, 0, 0}});
  d.cost_phases.push_back({0, cost});
  d.constraints = {
      poly2({{-6.0, 2, 0}, {-3.5, 1, 0}, {1.0, 0, 1}, {-0.6, 0, 0}}),
      poly2({{2.0, 2, 0}, {0.5, 1, 0}, {1.0, 0, 1}, {-0.75, 0, 0}}),
      poly2({{-1.0, 2, 0}, {-1.0, 0, 2}, {0.3, 0, 1}, {-0.0125, 0, 0}}),
  };
  d.known_constraint.assign(3, false);
  d.cost_kappa = Vector(2);
  *d.cost_kappa << 2.2, 0.35;
  d.u0 = Vector(2);
  if (name == "A") {
    d.name = "A";
    d.u0 << -0.5, 0.05;
    d.k_f = 1000;
  } else if (name == "B" || name == "B-changing") {
    d.name = name;
    d.u0 << 0.0, 0.4;
    d.k_f = 100;
    if (name == "B-changing") {
      d.cost_phases.push_back(
          {50, poly2({{1.0, 2, 0}, {0.5, 1, 0}, {1.0, 0, 2}, {-1.2, 0, 1}, {0.4225, 0, 0}})});
    }
  } else {
    throw std::invalid_argument("unknown benchmark problem: " + name);
  }
  return d;
}

double polynomial_range(const Polynomial& p, const InputBox& box, int points) {
  double r = 0.0;
  for_each_grid_point(box, std::vector<int>(static_cast<std::size_t>(box.size()), points),
                      [&](const Vector& u) { r = std::max(r, std::abs(p.value(u))); });
  return r;
}

std::pair<Matrix, Matrix> interval_derivative_bounds(const std::vector<Polynomial>& constraints,
                                                     const InputBox& box) {
  const int n_g = static_cast<int>(constraints.size());
  const int n_u = box.size();
  Matrix lo(n_g, n_u);
  Matrix hi(n_g, n_u);
  for (int j = 0; j < n_g; ++j) {
    for (int i = 0; i < n_u; ++i) {
      const Interval r = constraints[j].derivative(i).range_over(box.lo, box.hi);
      lo(j, i) = r.lo;
      hi(j, i) = r.hi;
    }
  }
  return {lo, hi};
}

PlantOptimum polish_optimum(const Polynomial& cost, const std::vector<Polynomial>& constraints,
                            const InputBox& box, double grid_step, double tol) {
  const int n = box.size();
  std::vector<int> counts(static_cast<std::size_t>(n));
  const int cap = std::max(3, static_cast<int>(std::pow(2.0e6, 1.0 / n)));
  for (int i = 0; i < n; ++i) {
    counts[i] = std::min(cap, static_cast<int>(std::lround((box.hi(i) - box.lo(i)) / grid_step)) + 1);
  }
  Vector best_u;
  double best = kInf;
  for_each_grid_point(box, counts, [&](const Vector& u) {
    for (const auto& g : constraints) {
      if (g.value(u) > 0.0) return;
    }
    const double v = cost.value(u);
    if (v < best) {
      best = v;
      best_u = u;
    }
  });
  if (!std::isfinite(best)) throw std::runtime_error("polish_optimum: no feasible grid point");

  // Candidate constraints: plant constraints followed by the box faces.
  const int n_g = static_cast<int>(constraints.size());
  const int n_c = n_g + 2 * n;
  auto c_value = [&](int c, const Vector& u) -> double {
    if (c < n_g) return constraints[c].value(u);
    const int i = (c - n_g) / 2;
    return (c - n_g) % 2 == 0 ? u(i) - box.hi(i) : box.lo(i) - u(i);
  };
  auto c_grad = [&](int c, const Vector& u) -> Vector {
    if (c < n_g) return constraints[c].gradient(u);
    const int i = (c - n_g) / 2;
    Vector g = Vector::Zero(n);
    g(i) = (c - n_g) % 2 == 0 ? 1.0 : -1.0;
    return g;
  };
  auto c_hess = [&](int c, const Vector& u) -> Matrix {
    if (c < n_g) return constraints[c].hessian(u);
    return Matrix::Zero(n, n);
  };

  std::vector<int> near;
  const double spacing = grid_step * 10.0;
  for (int c = 0; c < n_c; ++c) {
    const double scale = std::max(1.0, c_grad(c, best_u).lpNorm<1>());
    if (c_value(c, best_u) >= -spacing * scale) near.push_back(c);
  }

  PlantOptimum result{best_u, best};
  double result_val = best;
  const int n_near = static_cast<int>(near.size());
  for (int mask = 0; mask < (1 << n_near); ++mask) {
    std::vector<int> S;
    for (int b = 0; b < n_near; ++b) {
      if (mask & (1 << b)) S.push_back(near[b]);
    }
    if (static_cast<int>(S.size()) > n) continue;
    const int s = static_cast<int>(S.size());
    Vector u = best_u;
    Vector lam = Vector::Zero(s);
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      Vector F(n + s);
      Matrix J = Matrix::Zero(n + s, n + s);
      Vector grad = cost.gradient(u);
      Matrix H = cost.hessian(u);
      for (int a = 0; a < s; ++a) {
        const Vector ga = c_grad(S[a], u);
        grad += lam(a) * ga;
        H += lam(a) * c_hess(S[a], u);
        J.block(0, n + a, n, 1) = ga;
        J.block(n + a, 0, 1, n) = ga.transpose();
        F(n + a) = c_value(S[a], u);
      }
      F.head(n) = grad;
      J.topLeftCorner(n, n) = H;
      if (F.cwiseAbs().maxCoeff() <= 1e-15) {
        converged = true;
        break;
      }
      Eigen::FullPivLU<Matrix> lu(J);
      if (!lu.isInvertible()) break;
      const Vector step = lu.solve(-F);
      u += step.head(n);
      lam += step.tail(s);
      if (step.cwiseAbs().maxCoeff() <= tol * 1e-3) {
        converged = true;
        break;
      }
    }
    if (!converged || !u.allFinite()) continue;
    if ((u - best_u).cwiseAbs().maxCoeff() > spacing) continue;
    if (s > 0 && lam.minCoeff() < -1e-9) continue;
    bool feasible = true;
    for (int c = 0; c < n_c; ++c) feasible = feasible && c_value(c, u) <= tol * 1e-2;
    if (!feasible) continue;
    const double v = cost.value(u);
    if (v < result_val - 1e-15 || (v <= result_val && result.u.size() == 0)) {
      result = {box.clip(u), v};
      result_val = v;
    }
  }
  result.phi = cost.value(result.u);
  return result;
}

RtoProblem build_problem(const ProblemDefinition& def) {
  if (def.n_u <= 0) throw DimensionError("ProblemDefinition: n_u must be positive");
  if (def.box.size() != def.n_u || def.u0.size() != def.n_u) {
    throw DimensionError("ProblemDefinition: box or u0 size");
  }
  def.box.validate();
  if (def.cost_phases.empty()) throw std::invalid_argument("ProblemDefinition: no cost");
  for (const auto& ph : def.cost_phases) {
    if (ph.cost.n_vars() != def.n_u) throw DimensionError("ProblemDefinition: cost variable count");
  }
  for (const auto& g : def.constraints) {
    if (g.n_vars() != def.n_u) throw DimensionError("ProblemDefinition: constraint variable count");
  }

  RtoProblem p;
  p.name = def.name;
  p.n_u = def.n_u;
  p.n_g = static_cast<int>(def.constraints.size());
  p.box = def.box;
  p.u0 = def.u0;
  p.known_cost = def.known_cost;
  p.known_constraint = def.known_constraint.empty() ? std::vector<bool>(static_cast<std::size_t>(p.n_g), false)
                                                    : def.known_constraint;
  for (const auto& ph : def.cost_phases) {
    p.cost_phases.push_back({ph.start_iteration, as_function(ph.cost), is_convex_quadratic(ph.cost)});
  }
  p.constraint_ranges.resize(p.n_g);
  for (int j = 0; j < p.n_g; ++j) {
    p.constraints.push_back(as_function(def.constraints[j]));
    p.constraint_convex.push_back(is_convex_quadratic(def.constraints[j]));
    p.constraint_ranges(j) = std::max(polynomial_range(def.constraints[j], def.box), 1e-12);
  }
  p.cost_range = 0.0;
  for (const auto& ph : def.cost_phases) {
    p.cost_range = std::max(p.cost_range, polynomial_range(ph.cost, def.box));
  }
  p.cost_range = std::max(p.cost_range, 1e-12);

  if (def.kappa_lo && def.kappa_hi) {
    p.lipschitz = LipschitzTable::directional(*def.kappa_lo, *def.kappa_hi);
  } else if (def.kappa_hi) {
    p.lipschitz = LipschitzTable::symmetric(*def.kappa_hi);
  } else {
    auto [lo, hi] = interval_derivative_bounds(def.constraints, def.box);
    p.lipschitz = def.directional_kappa ? LipschitzTable::directional(lo, hi)
                                        : LipschitzTable::symmetric(lo.cwiseAbs().cwiseMax(hi.cwiseAbs()));
  }
  if (def.concave_in.size() > 0) p.lipschitz.concave_in = def.concave_in;

  if (def.cost_kappa) {
    p.cost_kappa = *def.cost_kappa;
  } else {
    auto [lo, hi] = interval_derivative_bounds({def.cost_phases.front().cost}, def.box);
    p.cost_kappa = lo.cwiseAbs().cwiseMax(hi.cwiseAbs()).row(0).transpose();
  }
  p.q_bound = def.q_bound ? *def.q_bound : cost_q_bound(def.cost_phases, def.box);
  for (const auto& ph : def.cost_phases) {
    p.optima.push_back(polish_optimum(ph.cost, def.constraints, def.box));
  }
  p.validate();
  const Vector g0 = p.constraint_values(p.u0);
  if ((g0.array() >= 0.0).any()) throw std::invalid_argument("ProblemDefinition: u0 is not strictly feasible");
  return p;
}

const RtoProblem& benchmark_problem(const std::string& name) {
  static std::mutex mu;
  static std::map<std::string, RtoProblem> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, build_problem(benchmark_definition(name))).first;
  return it->second;
}

RtoProblem cell_problem(const ExperimentCell& cell) {
  RtoProblem p = cell.definition ? build_problem(*cell.definition) : benchmark_problem(cell.problem);
  for (const auto& k : cell.known) {
    if (k == "phi") {
      p.known_cost = true;
      continue;
    }
    if (k.size() < 2 || k[0] != 'g') throw std::invalid_argument("unknown known element: " + k);
    const int j = std::stoi(k.substr(1)) - 1;
    if (j < 0 || j >= p.n_g) throw std::invalid_argument("known constraint out of range: " + k);
    p.known_constraint[j] = true;
  }
  for (const auto& [j, i] : cell.concave) {
    if (j < 0 || j >= p.n_g || i < 0 || i >= p.n_u) throw std::invalid_argument("concavity index out of range");
    p.lipschitz.concave_in(j, i) = true;
  }
  return p;
}

CampaignConfig cell_config(const ExperimentCell& cell, const RtoProblem& problem) {
  CampaignConfig cfg = cell.config;
  if (cell.slack_l > 0.0) cfg.slack = SlackState::soft_levels(problem.constraint_ranges, cell.slack_l);
  return cfg;
}

std::uint64_t replicate_seed(std::uint64_t seed_base, int cell_index, int replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_base), static_cast<std::uint32_t>(seed_base >> 32),
                    static_cast<std::uint32_t>(cell_index), static_cast<std::uint32_t>(replicate)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<double> violation_integrals(const CampaignTrace& trace) {
  std::vector<double> out;
  for (const auto& r : trace.records) {
    if (out.empty()) out.assign(static_cast<std::size_t>(r.g_true.size()), 0.0);
    for (Eigen::Index j = 0; j < r.g_true.size(); ++j) out[j] += std::max(0.0, r.g_true(j));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ExperimentSummary run_experiment(const ExperimentCell& cell, int replicates, const std::string& out_dir,
                                 std::uint64_t seed_base, int cell_index) {
  if (replicates < 1) throw std::invalid_argument("run_experiment: need at least one replicate");
  const auto t0 = std::chrono::steady_clock::now();
  const RtoProblem problem = cell_problem(cell);
  ExperimentSummary s;
  s.label = cell.label;
  s.replicates = replicates;
  s.max_violation_integral.assign(static_cast<std::size_t>(problem.n_g), 0.0);
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  for (int r = 0; r < replicates; ++r) {
    CampaignConfig cfg = cell_config(cell, problem);
    cfg.seed = replicate_seed(seed_base, cell_index, r);
    const CampaignTrace trace = run_campaign(problem, cfg);
    s.losses.push_back(optimality_loss(trace));
    const bool soft = cfg.slack && cfg.slack->any_soft();
    for (const auto& rec : trace.records) {
      if (!soft && (rec.g_true.array() > 1e-9).any()) ++s.violations;
    }
    const auto vi = violation_integrals(trace);
    for (std::size_t j = 0; j < vi.size(); ++j) {
      s.max_violation_integral[j] = std::max(s.max_violation_integral[j], vi[j]);
    }
    const TraceRecord& last = trace.records.back();
    if (const PlantOptimum* opt = problem.optimum_at(last.k)) {
      if ((last.u - opt->u).norm() > kPrematureRadius) ++s.premature;
    }
    if (!out_dir.empty()) {
      write_trace_csv((std::filesystem::path(out_dir) / (cell.label + "_r" + std::to_string(r) + ".csv")).string(),
                      trace);
    }
  }
  double sum = 0.0;
  for (double L : s.losses) sum += L;
  s.mean_loss = sum / replicates;
  s.median_loss = median(s.losses);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

namespace {

ExperimentCell make_cell(const std::string& label, const std::string& problem, AlgorithmKind algo,
                         Implementation impl, double sigma, double sigma_g, int k_f) {
  ExperimentCell c;
  c.label = label;
  c.problem = problem;
  c.config.algorithm.kind = algo;
  c.config.impl = impl;
  c.config.sigma = sigma;
  c.config.sigma_g = sigma_g;
  c.config.k_f = k_f;
  return c;
}

std::string fmt_level(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

const AlgorithmKind kAllAlgorithms[] = {AlgorithmKind::IdealTarget, AlgorithmKind::GradientDescent,
                                        AlgorithmKind::ModifierAdaptation, AlgorithmKind::TwoStep,
                                        AlgorithmKind::RandomStep};

}  // namespace

std::vector<ExperimentCell> preset_grid(const std::string& name) {
  std::vector<ExperimentCell> cells;
  if (name == "table1" || name == "table2") {
    const std::string prob = name == "table1" ? "A" : "B";
    const int k_f = name == "table1" ? 1000 : 100;
    for (AlgorithmKind a : kAllAlgorithms) {
      const std::string al = to_string(a);
      cells.push_back(make_cell(prob + "-" + al + "-s0-I", prob, a, Implementation::I, 0.0, 0.0, k_f));
      for (double s : {0.1, 0.3, 0.5}) {
        for (Implementation impl : {Implementation::II, Implementation::III, Implementation::IV}) {
          cells.push_back(make_cell(prob + "-" + al + "-s" + fmt_level(s) + "-" + to_string(impl), prob, a, impl,
                                    s, 0.0, k_f));
        }
      }
    }
  } else if (name == "table3" || name == "table4") {
    const bool a_prob = name == "table3";
    const std::string prob = a_prob ? "A" : "B";
    const int k_f = a_prob ? 1000 : 100;
    const std::vector<double> levels = a_prob ? std::vector<double>{0.0, 0.001, 0.002, 0.004}
                                              : std::vector<double>{0.0, 0.005, 0.01, 0.02};
    for (AlgorithmKind a : kAllAlgorithms) {
      for (double sg : levels) {
        cells.push_back(make_cell(prob + "-" + to_string(a) + "-sg" + fmt_level(sg), prob, a, Implementation::I,
                                  0.0, sg, k_f));
      }
    }
  } else if (name == "table5") {
    const std::vector<std::pair<std::string, std::vector<int>>> cases = {
        {"none", {}}, {"u1", {0}}, {"u2", {1}}, {"u1u2", {0, 1}}};
    for (const auto& [tag, inputs] : cases) {
      auto c = make_cell("A-concave-" + tag, "A", AlgorithmKind::IdealTarget, Implementation::I, 0.0, 0.0, 200);
      for (int i : inputs) {
        c.concave.push_back({0, i});
        c.concave.push_back({2, i});
      }
      cells.push_back(std::move(c));
    }
  } else if (name == "table6") {
    for (bool reuse : {false, true}) {
      auto c = make_cell(std::string("B-changing-") + (reuse ? "reuse" : "noreuse"), "B-changing",
                         AlgorithmKind::IdealTarget, Implementation::I, 0.0, 0.0, 100);
      c.config.supervisor.reuse_history = reuse;
      cells.push_back(std::move(c));
    }
  } else if (name == "table7") {
    for (double l : {0.0, 0.005, 0.02, 0.05}) {
      auto c = make_cell("A-slack-l" + fmt_level(l), "A", AlgorithmKind::IdealTarget, Implementation::I, 0.0, 0.0,
                         1000);
      c.slack_l = l;
      cells.push_back(std::move(c));
    }
    for (double l : {0.0, 0.01, 0.05, 0.1}) {
      auto c = make_cell("B-slack-l" + fmt_level(l), "B", AlgorithmKind::IdealTarget, Implementation::I, 0.0, 0.0,
                         100);
      c.slack_l = l;
      cells.push_back(std::move(c));
    }
  } else if (name == "table8") {
    const std::vector<std::vector<std::string>> cases = {{},           {"phi"},      {"g1"},
                                                         {"g2"},       {"g3"},       {"g1", "g3"},
                                                         {"phi", "g1", "g3"}};
    for (const auto& known : cases) {
      std::string tag = "none";
      if (!known.empty()) {
        tag.clear();
        for (const auto& k : known) tag += (tag.empty() ? "" : "+") + k;
      }
      auto c = make_cell("A-known-" + tag, "A", AlgorithmKind::IdealTarget, Implementation::I, 0.0, 0.0, 200);
      c.known = known;
      c.config.q_bound = 20.0 * Matrix::Identity(2, 2);
      cells.push_back(std::move(c));
    }
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return cells;
}

}  // namespace scfo
