#include "scfo/algorithms.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <optional>

namespace scfo {

const char* to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::IdealTarget:
      return "IT";
    case AlgorithmKind::GradientDescent:
      return "GD";
    case AlgorithmKind::ModifierAdaptation:
      return "MA";
    case AlgorithmKind::TwoStep:
      return "TS";
    case AlgorithmKind::RandomStep:
      return "RS";
  }
  return "?";
}

AlgorithmKind parse_algorithm(const std::string& s) {
  if (s == "IT" || s == "ideal-target") return AlgorithmKind::IdealTarget;
  if (s == "GD" || s == "gradient-descent") return AlgorithmKind::GradientDescent;
  if (s == "MA" || s == "modifier-adaptation") return AlgorithmKind::ModifierAdaptation;
  if (s == "TS" || s == "two-step") return AlgorithmKind::TwoStep;
  if (s == "RS" || s == "random-step") return AlgorithmKind::RandomStep;
  throw std::invalid_argument("unknown algorithm: " + s);
}

namespace {

Vector curvature(const AlgorithmSpec& spec, int n_u) {
  if (spec.model_curvature.size() == 0) return Vector::Constant(n_u, 2.0);
  if (spec.model_curvature.size() != n_u) throw DimensionError("AlgorithmSpec: model curvature size");
  if ((spec.model_curvature.array() <= 0.0).any()) {
    throw std::invalid_argument("AlgorithmSpec: model curvature must be positive");
  }
  return spec.model_curvature;
}

// Fits phi = a + sum_i h_i/2 (u_i - c_i)^2 with fixed h to recent distinct
// measurements and returns the fitted center c.
std::optional<Vector> fit_center(const IterateState& state, const Vector& h, int window) {
  const int n = static_cast<int>(h.size());
  std::vector<const HistoryEntry*> pts;
  for (auto it = state.history.rbegin(); it != state.history.rend(); ++it) {
    bool dup = false;
    for (const auto* p : pts) {
      if ((p->u - it->u).cwiseAbs().maxCoeff() < 1e-12) {
        dup = true;
        break;
      }
    }
    if (!dup) pts.push_back(&*it);
    if (static_cast<int>(pts.size()) >= window) break;
  }
  if (static_cast<int>(pts.size()) < n + 1) return std::nullopt;
  // phi - sum h_i/2 u_i^2 = a' - sum h_i c_i u_i
  Matrix X(static_cast<Eigen::Index>(pts.size()), n + 1);
  Vector y(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t r = 0; r < pts.size(); ++r) {
    const Vector& u = pts[r]->u;
    X(r, 0) = 1.0;
    X.row(r).tail(n) = u.transpose();
    y(r) = pts[r]->phi_meas - 0.5 * (h.array() * u.array().square()).sum();
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  qr.setThreshold(1e-8);
  if (qr.rank() < n + 1) return std::nullopt;
  const Vector coef = qr.solve(y);
  Vector c(n);
  for (int i = 0; i < n; ++i) c(i) = -coef(i + 1) / h(i);
  if (!c.allFinite()) return std::nullopt;
  return c;
}

}  // namespace

Vector next_target(const AlgorithmSpec& spec, const IterateState& state, const RtoProblem& problem,
                   std::mt19937_64& rng) {
  if (state.history.empty()) throw std::invalid_argument("next_target: no measurements yet");
  const Vector& u = state.u;
  const InputBox& box = problem.box;
  switch (spec.kind) {
    case AlgorithmKind::IdealTarget: {
      const PlantOptimum* opt = problem.optimum_at(state.k);
      if (!opt) throw std::invalid_argument("next_target: the problem has no cached optimum");
      return box.clip(opt->u);
    }
    case AlgorithmKind::GradientDescent:
      return box.clip(u - spec.step_length * state.cost_box.estimate);
    case AlgorithmKind::ModifierAdaptation: {
      // Separable quadratic model whose gradient at u_k is corrected to the estimate.
      const Vector h = curvature(spec, problem.n_u);
      return box.clip(u - state.cost_box.estimate.cwiseQuotient(h));
    }
    case AlgorithmKind::TwoStep: {
      const auto c = fit_center(state, curvature(spec, problem.n_u), spec.fit_window);
      return c ? box.clip(*c) : u;
    }
    case AlgorithmKind::RandomStep: {
      std::uniform_real_distribution<double> U(-1.0, 1.0);
      Vector step(problem.n_u);
      const Vector span = box.span();
      for (int i = 0; i < problem.n_u; ++i) step(i) = spec.random_scale * span(i) * U(rng);
      return box.clip(u + step);
    }
  }
  return u;
}

}  // namespace scfo
