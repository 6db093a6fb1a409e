#include "scfo/supervisor.hpp"

#include <algorithm>
#include <cmath>

namespace scfo {

const char* to_string(InfeasibilityPolicy p) {
  switch (p) {
    case InfeasibilityPolicy::DeclareConvergence:
      return "declare-convergence";
    case InfeasibilityPolicy::PerturbAndRefine:
      return "perturb-and-refine";
    case InfeasibilityPolicy::PartialRobustness:
      return "partial-robustness";
  }
  return "?";
}

InfeasibilityPolicy parse_policy(const std::string& s) {
  if (s == "declare-convergence") return InfeasibilityPolicy::DeclareConvergence;
  if (s == "perturb-and-refine") return InfeasibilityPolicy::PerturbAndRefine;
  if (s == "partial-robustness") return InfeasibilityPolicy::PartialRobustness;
  throw std::invalid_argument("unknown infeasibility policy: " + s);
}

void SupervisorConfig::validate() const {
  if (!(p_step > 0.0 && p_step < 1.0)) throw std::invalid_argument("SupervisorConfig: P step outside (0, 1)");
  if (!(m_fraction > 0.0 && m_fraction <= 1.0)) {
    throw std::invalid_argument("SupervisorConfig: m fraction outside (0, 1]");
  }
  if (!(m_max > 0.0)) throw std::invalid_argument("SupervisorConfig: m_max must be positive");
  if (params.eps.size() > 0) params.validate();
}

namespace {

int level_count(double p_step) {
  const double steps = 1.0 / p_step;
  const double r = std::round(steps);
  return std::abs(steps - r) < 1e-9 ? static_cast<int>(r) : static_cast<int>(std::ceil(steps));
}

double level_value(int i, int n_levels, double p_step) {
  if (i >= n_levels) return 0.0;
  const double steps = 1.0 / p_step;
  if (std::abs(steps - std::round(steps)) < 1e-9) {
    return static_cast<double>(n_levels - i) / n_levels;
  }
  return std::max(0.0, 1.0 - i * p_step);
}

// Smallest level index whose descent set is feasible. Shrinking the boxes only
// enlarges the set, so feasibility is monotone in the index; the last level
// (P = 0) is feasible whenever the 0-robustness test passed.
template <typename Feasible>
int search_p_level(int n_levels, Feasible&& feasible) {
  if (feasible(0)) return 0;
  int lo = 0;
  int hi = n_levels;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

std::vector<GradientBox> shrink_all(const std::vector<GradientBox>& boxes, double P) {
  std::vector<GradientBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) out.push_back(shrink_box(b, P));
  return out;
}

std::vector<GradientBox> exact_all(const std::vector<GradientBox>& boxes) {
  std::vector<GradientBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) out.push_back(GradientBox::exact(b.estimate));
  return out;
}

DescentSet standard_set(const Vector& u_k, const GradientBox& cost_box,
                        const std::vector<GradientBox>& boxes, const std::vector<int>& active,
                        const ProjectionParams& params, const InputBox& box) {
  DescentSet set(u_k, box);
  set.add_robust(cost_box, params.delta_phi);
  for (int j : active) set.add_robust(boxes[j], params.delta_g(j));
  return set;
}

void null_step(IterationOutcome& out, const Vector& u_k, IterationStatus status, const char* event) {
  out.status = status;
  out.u_next = u_k;
  out.diag.K = 0.0;
  out.diag.variant = status == IterationStatus::Converged ? "converged" : "none";
  out.diag.binding = "null";
  out.diag.events.emplace_back(event);
}

void floor_reached(IterationOutcome& out, const Vector& u_k, const SupervisorConfig& cfg) {
  switch (cfg.policy) {
    case InfeasibilityPolicy::DeclareConvergence:
      null_step(out, u_k, IterationStatus::Converged, "floor");
      break;
    case InfeasibilityPolicy::PerturbAndRefine:
      null_step(out, u_k, IterationStatus::PerturbationRequested, "floor");
      break;
    case InfeasibilityPolicy::PartialRobustness:
      null_step(out, u_k, IterationStatus::Stepped, "floor");
      break;
  }
}

bool all_degenerate(const GradientBox* cost_box, const std::vector<GradientBox>& boxes,
                    const std::vector<int>& active) {
  if (cost_box && !cost_box->is_degenerate()) return false;
  for (int j : active) {
    if (!boxes[j].is_degenerate()) return false;
  }
  return true;
}

Vector growth_vector(const RtoProblem& problem, const Vector& du, const Vector& u_k,
                     const std::vector<GradientBox>& full_boxes) {
  Vector growth = Vector::Zero(problem.n_g);
  for (int j = 0; j < problem.n_g; ++j) {
    if (problem.is_known(j)) continue;
    const GradientBox* gb = problem.lipschitz.row_has_concave(j) ? &full_boxes.at(j) : nullptr;
    growth(j) = lipschitz_growth(problem.lipschitz, j, du, gb, &u_k);
  }
  return growth;
}

std::string classify_binding(double k_feas, double k_cost, double K, bool union_relaxed) {
  if (K <= 0.0) return "null";
  if (K >= 1.0) return "clamp";
  if (k_feas <= k_cost) return union_relaxed ? "union-relaxed" : "feasibility";
  return "cost";
}

double feasibility_gain(const IterateState& state, const SupervisorConfig& cfg,
                        const RtoProblem& problem, const Vector& u_bar, const Vector& growth,
                        const std::vector<GradientBox>& full_boxes, bool& union_relaxed) {
  const double local = gain_feasibility(state.g_upper, growth, state.slack);
  union_relaxed = false;
  if (!cfg.reuse_history) return local;
  LineSearchOptions opts;
  opts.samples = cfg.line_search_samples;
  // Known constraints have zero growth; keep them out of the union test.
  Vector g_upper = state.g_upper;
  for (int j = 0; j < problem.n_g; ++j) {
    if (problem.is_known(j)) g_upper(j) = -kInf;
  }
  const double relaxed = union_line_search(state.u, u_bar, state.history, problem.lipschitz,
                                           g_upper, full_boxes, state.slack, opts);
  if (relaxed > std::min(1.0, local)) {
    union_relaxed = true;
    return relaxed;
  }
  return local;
}

IterationOutcome run_standard(const IterateState& state, const Vector& target,
                              const SupervisorConfig& cfg, const RtoProblem& problem) {
  IterationOutcome out;
  IterationDiagnostics& d = out.diag;
  const Vector& u_k = state.u;
  const InputBox& box = problem.box;
  ProjectionParams params = cfg.params;
  params.reset_to_ceilings();

  const GradientBox cost_nominal = GradientBox::exact(state.cost_box.estimate);
  const std::vector<GradientBox> cons_nominal = exact_all(state.constraint_boxes);

  std::vector<int> active;
  while (true) {
    active = epsilon_active_set(state.g_upper, params.eps);
    if (standard_set(u_k, cost_nominal, cons_nominal, active, params, box).feasible(cfg.qp)) break;
    params.halve();
    ++d.halvings;
    if (params.below_floors()) {
      d.eps = params.eps;
      d.delta_g = params.delta_g;
      d.delta_phi = params.delta_phi;
      d.active_set = active;
      d.P = 0.0;
      floor_reached(out, u_k, cfg);
      return out;
    }
  }

  GradientBox cost_full = state.cost_box;
  std::vector<GradientBox> cons_full = state.constraint_boxes;
  if (cfg.m_mode) {
    std::vector<Vector> cons_est;
    for (const auto& b : state.constraint_boxes) cons_est.push_back(b.estimate);
    const double m_bar = max_robust_m(u_k, state.cost_box.estimate, state.cost_sigma, cons_est,
                                      state.constraint_sigma, active, params, box, cfg.m_max, cfg.qp);
    d.m = cfg.m_fraction * m_bar;
    cost_full = build_gradient_box(state.cost_box.estimate, state.cost_sigma, d.m);
    for (int j = 0; j < problem.n_g; ++j) {
      cons_full[j] = build_gradient_box(cons_est[j], state.constraint_sigma[j], d.m);
    }
  }

  const int n_levels = level_count(cfg.p_step);
  std::optional<Vector> u_bar;
  if (all_degenerate(&cost_full, cons_full, active)) {
    params.P = 1.0;
    u_bar = standard_set(u_k, cost_full, cons_full, active, params, box).project(target, cfg.qp);
  } else {
    auto set_at = [&](int i) {
      const double P = level_value(i, n_levels, cfg.p_step);
      return standard_set(u_k, shrink_box(cost_full, P), shrink_all(cons_full, P), active, params, box);
    };
    const int first = search_p_level(n_levels, [&](int i) { return set_at(i).feasible(cfg.qp); });
    for (int i = first; i <= n_levels; ++i) {
      params.P = level_value(i, n_levels, cfg.p_step);
      d.p_steps = i;
      u_bar = set_at(i).project(target, cfg.qp);
      if (u_bar) break;
    }
  }
  d.P = params.P;
  d.eps = params.eps;
  d.delta_g = params.delta_g;
  d.delta_phi = params.delta_phi;
  d.active_set = active;
  d.cost_box = shrink_box(cost_full, params.P);
  d.constraint_boxes = shrink_all(cons_full, params.P);
  d.full_constraint_boxes = cons_full;
  if (d.p_steps > 0) d.events.emplace_back("p-reduced");
  if (!u_bar) {
    floor_reached(out, u_k, cfg);
    return out;
  }

  d.u_bar = *u_bar;
  d.variant = all_degenerate(&cost_full, cons_full, active) ? "nominal" : "robust";
  const Vector du = *u_bar - u_k;
  const Vector growth = growth_vector(problem, du, u_k, cons_full);
  bool union_relaxed = false;
  d.k_feas = feasibility_gain(state, cfg, problem, *u_bar, growth, cons_full, union_relaxed);
  const GradientBox& cost_for_gain = cfg.fully_robust_cost_gain ? cost_full : d.cost_box;
  d.k_cost = worst_case_directional(cost_for_gain, du) < 0.0
                 ? gain_cost_decrease(cost_for_gain, state.qbound, du, cfg.cost_gain_factor)
                 : 0.0;
  d.K = compose_gain(d.k_feas, d.k_cost);
  d.binding = classify_binding(d.k_feas, d.k_cost, d.K, union_relaxed);
  out.status = IterationStatus::Stepped;
  out.u_next = apply_input_filter(u_k, *u_bar, d.K);
  return out;
}

struct KnownStage {
  CostRow cost_row;
  bool known_rows;
  const char* variant;
};

IterationOutcome run_known(const IterateState& state, const Vector& target,
                           const SupervisorConfig& cfg, const RtoProblem& problem) {
  const Vector& u_k = state.u;
  const InputBox& box = problem.box;
  const int n_g = problem.n_g;
  const ScalarFunction& cost_fn = problem.phase_at(state.k).cost;

  KnownGradientData full;
  full.cost_box = state.cost_box;
  full.constraint_boxes = state.constraint_boxes;
  full.known_gradients.assign(static_cast<std::size_t>(n_g), Vector::Zero(problem.n_u));
  std::vector<KnownConstraint> known_refs;
  std::vector<int> known_active_all;
  for (int j = 0; j < n_g; ++j) {
    if (!problem.is_known(j)) continue;
    full.known_gradients[j] = problem.constraint_gradient(j, u_k);
    const bool convex = !problem.constraint_convex.empty() && problem.constraint_convex[j];
    known_refs.push_back({&problem.constraints[j], convex});
    const double scale = cfg.params.eps_ceiling.size() > j ? cfg.params.eps_ceiling(j) : 1.0;
    if (std::abs(problem.constraints[j].value(u_k)) <= cfg.known_active_tol * scale) {
      known_active_all.push_back(j);
    }
  }
  if (problem.known_cost) full.cost_gradient = cost_fn.gradient(u_k);

  std::vector<KnownStage> stages;
  if (problem.known_cost) {
    stages.push_back({CostRow::Absent, false, "known-cost"});
    stages.push_back({CostRow::Exact, false, "known-cost-descent"});
    if (problem.any_known_constraint()) stages.push_back({CostRow::Exact, true, "known-all-active"});
  } else {
    stages.push_back({CostRow::Robust, false, "known-constraints"});
    stages.push_back({CostRow::Robust, true, "known-constraints-active"});
  }

  IterationOutcome out;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const KnownStage& stage = stages[s];
    const bool last_stage = s + 1 == stages.size();
    out = IterationOutcome{};
    IterationDiagnostics& d = out.diag;
    if (s > 0) d.events.emplace_back("stage-fallback");
    ProjectionParams params = cfg.params;
    params.reset_to_ceilings();
    const std::vector<int> active_known = stage.known_rows ? known_active_all : std::vector<int>{};

    KnownGradientData nominal = full;
    nominal.cost_box = GradientBox::exact(full.cost_box.estimate);
    nominal.constraint_boxes = exact_all(full.constraint_boxes);

    std::vector<int> active;
    bool floored = false;
    while (true) {
      active.clear();
      for (int j : epsilon_active_set(state.g_upper, params.eps)) {
        if (!problem.is_known(j)) active.push_back(j);
      }
      nominal.cost_row = stage.cost_row;
      if (known_constraints_set(u_k, nominal, active, active_known, params, box).feasible(cfg.qp)) break;
      params.halve();
      ++d.halvings;
      if (params.below_floors()) {
        floored = true;
        break;
      }
    }
    d.active_set = active;
    d.active_known = active_known;
    d.eps = params.eps;
    d.delta_g = params.delta_g;
    d.delta_phi = params.delta_phi;
    if (floored) {
      floor_reached(out, u_k, cfg);
      if (!last_stage && cfg.policy == InfeasibilityPolicy::PartialRobustness) continue;
      return out;
    }

    KnownGradientData data = full;
    data.cost_row = stage.cost_row;
    const GradientBox* cost_ptr = stage.cost_row == CostRow::Robust ? &data.cost_box : nullptr;
    const int n_levels = level_count(cfg.p_step);
    std::optional<Vector> u_bar;
    if (all_degenerate(cost_ptr, data.constraint_boxes, active)) {
      params.P = 1.0;
      u_bar = known_constraints_set(u_k, data, active, active_known, params, box).project(target, cfg.qp);
    } else {
      auto set_at = [&](int i) {
        const double P = level_value(i, n_levels, cfg.p_step);
        KnownGradientData shrunk = data;
        shrunk.cost_box = shrink_box(data.cost_box, P);
        shrunk.constraint_boxes = shrink_all(data.constraint_boxes, P);
        return known_constraints_set(u_k, shrunk, active, active_known, params, box);
      };
      const int first = search_p_level(n_levels, [&](int i) { return set_at(i).feasible(cfg.qp); });
      for (int i = first; i <= n_levels; ++i) {
        params.P = level_value(i, n_levels, cfg.p_step);
        d.p_steps = i;
        u_bar = set_at(i).project(target, cfg.qp);
        if (u_bar) break;
      }
    }
    d.P = params.P;
    d.cost_box = shrink_box(data.cost_box, params.P);
    d.constraint_boxes = shrink_all(data.constraint_boxes, params.P);
    d.full_constraint_boxes = data.constraint_boxes;
    d.variant = stage.variant;
    if (!u_bar) {
      floor_reached(out, u_k, cfg);
      if (!last_stage) continue;
      return out;
    }
    d.u_bar = *u_bar;
    const Vector du = *u_bar - u_k;
    const Vector growth = growth_vector(problem, du, u_k, data.constraint_boxes);
    bool union_relaxed = false;
    d.k_feas = feasibility_gain(state, cfg, problem, *u_bar, growth, data.constraint_boxes,
                                union_relaxed);
    if (problem.known_cost) {
      d.K = line_search_known_cost(u_k, *u_bar, &cost_fn, d.k_feas, known_refs,
                                   KnownLineSearch::MinimizeCost, cfg.line_search_samples);
      d.k_cost = kInf;
    } else {
      d.k_cost = worst_case_directional(d.cost_box, du) < 0.0
                     ? gain_cost_decrease(d.cost_box, state.qbound, du, cfg.cost_gain_factor)
                     : 0.0;
      d.K = line_search_known_cost(u_k, *u_bar, nullptr, std::min(d.k_feas, d.k_cost), known_refs,
                                   KnownLineSearch::MaximizeStep, cfg.line_search_samples);
    }
    d.binding = d.K <= 0.0 ? "null" : (d.K >= 1.0 ? "clamp" : "line-search");
    if (union_relaxed && d.K > 0.0) d.binding = "union-relaxed";
    out.status = IterationStatus::Stepped;
    out.u_next = apply_input_filter(u_k, *u_bar, d.K);
    if (d.K >= kNullGain || last_stage) return out;
  }
  return out;
}

}  // namespace

int first_feasible_p_level(const Vector& u_k, const GradientBox& cost_box,
                           const std::vector<GradientBox>& constraint_boxes,
                           const std::vector<int>& active, const ProjectionParams& params,
                           const InputBox& box, double p_step, const QpOptions& opts) {
  const int n_levels = level_count(p_step);
  if (!standard_set(u_k, shrink_box(cost_box, 0.0), shrink_all(constraint_boxes, 0.0), active, params, box)
           .feasible(opts)) {
    return -1;
  }
  return search_p_level(n_levels, [&](int i) {
    const double P = level_value(i, n_levels, p_step);
    return standard_set(u_k, shrink_box(cost_box, P), shrink_all(constraint_boxes, P), active, params, box)
        .feasible(opts);
  });
}

double max_robust_m(const Vector& u_k, const Vector& cost_estimate, const Vector& cost_sigma,
                    const std::vector<Vector>& constraint_estimates,
                    const std::vector<Vector>& constraint_sigmas, const std::vector<int>& active,
                    const ProjectionParams& params, const InputBox& box, double m_max,
                    const QpOptions& opts) {
  if (constraint_estimates.size() != constraint_sigmas.size()) {
    throw DimensionError("max_robust_m: estimate and sigma counts differ");
  }
  double scale = cost_sigma.size() > 0 ? cost_sigma.cwiseAbs().maxCoeff() : 0.0;
  for (int j : active) scale = std::max(scale, constraint_sigmas.at(j).cwiseAbs().maxCoeff());
  if (scale == 0.0) return m_max;

  auto feasible = [&](double m) {
    DescentSet set(u_k, box);
    set.add_robust(build_gradient_box(cost_estimate, cost_sigma, m), params.delta_phi);
    for (int j : active) {
      set.add_robust(build_gradient_box(constraint_estimates[j], constraint_sigmas[j], m),
                     params.delta_g(j));
    }
    return set.feasible(opts);
  };

  double lo = 0.0;
  double hi = 1.0;
  while (feasible(hi)) {
    lo = hi;
    if (hi >= m_max) return m_max;
    hi = std::min(2.0 * hi, m_max);
  }
  const double tol = 1e-4 * scale;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

IterationOutcome run_iteration(const IterateState& state, const Vector& target,
                               const SupervisorConfig& cfg, const RtoProblem& problem) {
  if (!problem.box.contains(target, 1e-12)) {
    throw std::invalid_argument("run_iteration: target outside the input box");
  }
  if (static_cast<int>(state.constraint_boxes.size()) != problem.n_g ||
      state.g_upper.size() != problem.n_g) {
    throw DimensionError("run_iteration: state does not match the problem");
  }
  if (cfg.params.eps.size() != problem.n_g) {
    throw DimensionError("run_iteration: projection parameters do not match the problem");
  }
  if (cfg.m_mode && (state.cost_sigma.size() != problem.n_u ||
                     static_cast<int>(state.constraint_sigma.size()) != problem.n_g)) {
    throw DimensionError("run_iteration: m mode needs per-derivative scales");
  }
  const Vector target_in = problem.box.clip(target);
  if (problem.known_cost || problem.any_known_constraint()) {
    return run_known(state, target_in, cfg, problem);
  }
  return run_standard(state, target_in, cfg, problem);
}

}  // namespace scfo
