#include "scfo/step_filter.hpp"

#include <algorithm>
#include <cmath>

namespace scfo {

SlackState SlackState::hard(int n_g) {
  SlackState s;
  s.d = Vector::Zero(n_g);
  s.d_total = Vector::Zero(n_g);
  s.beta = Vector::Zero(n_g);
  s.d0 = Vector::Zero(n_g);
  return s;
}

SlackState SlackState::soft_levels(const Vector& eps_bar, double l, double total_ratio) {
  if (l < 0.0) throw std::invalid_argument("SlackState: negative slack level");
  if (l == 0.0) return hard(static_cast<int>(eps_bar.size()));
  if (total_ratio < 1.0) throw std::invalid_argument("SlackState: total ratio below one");
  SlackState s;
  s.d0 = l * eps_bar;
  s.d = s.d0;
  s.d_total = total_ratio * s.d0;
  s.beta = Vector::Constant(eps_bar.size(), (total_ratio - 1.0) / total_ratio);
  s.validate();
  return s;
}

bool SlackState::any_soft() const { return (d0.array() > 0.0).any(); }

void SlackState::validate() const {
  const auto n = d.size();
  if (d_total.size() != n || beta.size() != n || d0.size() != n) {
    throw DimensionError("SlackState: vector sizes differ");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (d(j) < 0.0 || d(j) > d0(j)) throw std::invalid_argument("SlackState: d outside [0, d0]");
    if (beta(j) < 0.0 || beta(j) >= 1.0) throw std::invalid_argument("SlackState: beta outside [0, 1)");
    if (d0(j) > 0.0 && beta(j) > beta_max(d0(j), d_total(j)) + 1e-15) {
      throw std::invalid_argument("SlackState: beta exceeds the violation budget bound");
    }
  }
}

double gain_feasibility(const Vector& g_upper, const Vector& growth, const SlackState& slack) {
  require_same_size(g_upper, growth, "gain_feasibility");
  double K = kInf;
  for (Eigen::Index j = 0; j < g_upper.size(); ++j) {
    if (!(growth(j) > 0.0)) continue;
    const double d = slack.d.size() > j ? slack.d(j) : 0.0;
    const double num = -g_upper(j) + d;
    K = std::min(K, num <= 0.0 ? 0.0 : num / growth(j));
  }
  return std::max(0.0, K);
}

double gain_cost_decrease(const GradientBox& cost_box, const QBoundState& q, const Vector& du,
                          double factor) {
  const double wc = worst_case_directional(cost_box, du);
  if (!(wc < 0.0)) {
    throw std::invalid_argument("gain_cost_decrease: step is not a robust descent direction");
  }
  const double quad = quad_form_upper(q, du);
  if (!(quad > 0.0)) return kInf;
  return -factor * wc / quad;
}

double compose_gain(double k_feas, double k_cost) {
  const double K = std::min(k_feas, k_cost);
  if (!(K >= 0.0)) return 0.0;
  return std::min(K, 1.0);
}

namespace {

const GradientBox* box_for(const std::vector<GradientBox>& boxes, const LipschitzTable& lip, int j) {
  if (!lip.row_has_concave(j)) return nullptr;
  if (static_cast<int>(boxes.size()) <= j) {
    throw std::invalid_argument("union_line_search: gradient box missing for concave row");
  }
  return &boxes[j];
}

}  // namespace

double union_line_search(const Vector& u_k, const Vector& u_bar,
                         const std::vector<HistoryEntry>& history, const LipschitzTable& lip,
                         const Vector& g_upper, const std::vector<GradientBox>& current_boxes,
                         const SlackState& slack, const LineSearchOptions& opts) {
  require_same_size(u_k, u_bar, "union_line_search");
  const int n_g = static_cast<int>(g_upper.size());
  const Vector du = u_bar - u_k;
  Vector growth(n_g);
  for (int j = 0; j < n_g; ++j) growth(j) = lipschitz_growth(lip, j, du, box_for(current_boxes, lip, j));
  const double local = std::min(1.0, gain_feasibility(g_upper, growth, slack));
  if (du.cwiseAbs().maxCoeff() == 0.0) return local;

  std::vector<std::vector<const HistoryEntry*>> candidates(static_cast<std::size_t>(n_g));
  for (int j = 0; j < n_g; ++j) {
    const double d = slack.d.size() > j ? slack.d(j) : 0.0;
    for (const auto& rec : history) {
      if (rec.g_upper.size() > j && rec.g_upper(j) < d) candidates[j].push_back(&rec);
    }
  }

  auto member = [&](double K) {
    const Vector u = u_k + K * du;
    for (int j = 0; j < n_g; ++j) {
      const double d = slack.d.size() > j ? slack.d(j) : 0.0;
      if (g_upper(j) + K * growth(j) <= d) continue;
      bool inside = false;
      for (const HistoryEntry* rec : candidates[j]) {
        if (feasible_polytope_contains(*rec, lip, u, j, d)) {
          inside = true;
          break;
        }
      }
      if (!inside) return false;
    }
    return true;
  };

  const int N = std::max(1, opts.samples);
  for (int i = N; i >= 1; --i) {
    const double K = static_cast<double>(i) / N;
    if (K <= local) break;
    if (!member(K)) continue;
    double lo = K;
    if (i < N) {
      double hi = static_cast<double>(i + 1) / N;
      while (hi - lo > opts.tolerance) {
        const double mid = 0.5 * (lo + hi);
        (member(mid) ? lo : hi) = mid;
      }
    }
    return std::max(lo, local);
  }
  return local;
}

double line_search_known_cost(const Vector& u_k, const Vector& u_bar,
                              const ScalarFunction* known_cost, double gain_cap,
                              const std::vector<KnownConstraint>& known_constraints,
                              KnownLineSearch mode, int samples) {
  require_same_size(u_k, u_bar, "line_search_known_cost");
  if (mode == KnownLineSearch::MinimizeCost && (known_cost == nullptr || !*known_cost)) {
    throw std::invalid_argument("line_search_known_cost: the cost must be known to minimize it");
  }
  const double cap = std::min(1.0, gain_cap);
  if (!(cap > 0.0)) return 0.0;
  const Vector du = u_bar - u_k;
  auto point = [&](double K) -> Vector { return u_k + K * du; };

  // Convex constraints feasible at both ends of [0, cap] hold on the whole segment.
  std::vector<const ScalarFunction*> checked;
  for (const auto& kc : known_constraints) {
    if (kc.convex && kc.fn->value(point(cap)) <= 0.0) continue;
    checked.push_back(kc.fn);
  }
  auto feasible = [&](double K) {
    if (K == 0.0) return true;
    const Vector u = point(K);
    for (const ScalarFunction* f : checked) {
      if (f->value(u) > 0.0) return false;
    }
    return true;
  };
  // Largest feasible K in [a, b] given a feasible, b infeasible.
  auto boundary = [&](double a, double b) {
    while (b - a > 1e-12 * cap) {
      const double mid = 0.5 * (a + b);
      (feasible(mid) ? a : b) = mid;
    }
    return a;
  };

  const int N = std::max(2, samples);
  if (mode == KnownLineSearch::MaximizeStep) {
    if (feasible(cap)) return cap;
    for (int i = N - 1; i >= 1; --i) {
      const double K = cap * i / N;
      if (feasible(K)) return boundary(K, cap * (i + 1) / N);
    }
    return 0.0;
  }

  auto phi = [&](double K) { return known_cost->value(point(K)); };
  auto slope = [&](double K) { return known_cost->gradient(point(K)).dot(du); };
  std::vector<char> ok(static_cast<std::size_t>(N + 1));
  int best = 0;
  double best_val = phi(0.0);
  for (int i = 0; i <= N; ++i) {
    const double K = cap * i / N;
    ok[static_cast<std::size_t>(i)] = feasible(K) ? 1 : 0;
    if (i == 0 || !ok[static_cast<std::size_t>(i)]) continue;
    const double v = phi(K);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double K_best = cap * best / N;
  double lo = best > 0 ? cap * (best - 1) / N : 0.0;
  double hi = best < N ? cap * (best + 1) / N : cap;
  if (best > 0 && !ok[static_cast<std::size_t>(best - 1)]) {
    // Smallest feasible K in [K_{best-1}, K_best].
    double a = lo;
    double b = K_best;
    while (b - a > 1e-12 * cap) {
      const double mid = 0.5 * (a + b);
      (feasible(mid) ? b : a) = mid;
    }
    lo = b;
  }
  if (best < N && !ok[static_cast<std::size_t>(best + 1)]) hi = boundary(K_best, hi);

  double K_star;
  if (slope(hi) <= 0.0) {
    K_star = hi;
  } else if (slope(lo) >= 0.0) {
    K_star = lo;
  } else {
    double a = lo;
    double b = hi;
    for (int it = 0; it < 200 && b - a > 1e-15 * cap; ++it) {
      const double mid = 0.5 * (a + b);
      (slope(mid) < 0.0 ? a : b) = mid;
    }
    K_star = 0.5 * (a + b);
  }
  if (!feasible(K_star) || phi(K_star) > best_val) K_star = K_best;
  return K_star;
}

SlackState slack_step(const SlackState& slack, const Vector& g_upper_at_uk) {
  require_same_size(slack.d, g_upper_at_uk, "slack_step");
  SlackState out = slack;
  for (Eigen::Index j = 0; j < slack.d.size(); ++j) {
    if (slack.is_soft(static_cast<int>(j)) && g_upper_at_uk(j) >= 0.0) out.d(j) *= slack.beta(j);
  }
  return out;
}

double beta_max(double d0, double d_total) {
  if (!(d0 > 0.0)) throw std::invalid_argument("beta_max: d0 must be positive");
  if (d_total < d0) throw std::invalid_argument("beta_max: budget below a single violation");
  if (std::isinf(d_total)) return 1.0;
  return (d_total - d0) / d_total;
}

bool needs_fallback(const Vector& g_upper, const SlackState& slack) {
  for (Eigen::Index j = 0; j < slack.d.size(); ++j) {
    if (slack.is_soft(static_cast<int>(j)) && g_upper(j) >= slack.d(j)) return true;
  }
  return false;
}

int fallback_reference(const IterateState& state, const SlackState& slack) {
  if (state.history.empty()) throw std::invalid_argument("fallback_reference: empty history");
  const int last = static_cast<int>(state.history.size()) - 1;
  if (!needs_fallback(state.history[last].g_upper, slack)) return last;
  int best = 0;
  double best_cost = kInf;
  for (int i = 0; i <= last; ++i) {
    const HistoryEntry& e = state.history[i];
    bool qualifies = true;
    for (Eigen::Index j = 0; j < slack.d.size(); ++j) {
      if (slack.is_soft(static_cast<int>(j)) && !(e.g_upper(j) < slack.d(j))) {
        qualifies = false;
        break;
      }
    }
    if (qualifies && e.phi_meas < best_cost) {
      best_cost = e.phi_meas;
      best = i;
    }
  }
  return best;
}

}  // namespace scfo
