#include "scfo/problem.hpp"

#include <cmath>

namespace scfo {

int RtoProblem::phase_index(int k) const {
  if (cost_phases.empty()) throw std::logic_error("RtoProblem: no cost defined");
  int idx = 0;
  for (int i = 0; i < static_cast<int>(cost_phases.size()); ++i) {
    if (cost_phases[i].start_iteration <= k) idx = i;
  }
  return idx;
}

Vector RtoProblem::constraint_values(const Vector& u) const {
  Vector g(n_g);
  for (int j = 0; j < n_g; ++j) g(j) = constraints[j].value(u);
  return g;
}

Vector RtoProblem::constraint_gradient(int j, const Vector& u) const {
  return constraints.at(j).gradient(u);
}

bool RtoProblem::any_known_constraint() const {
  for (bool b : known_constraint) {
    if (b) return true;
  }
  return false;
}

int RtoProblem::uncertain_count() const {
  int n = 0;
  for (int j = 0; j < n_g; ++j) n += is_known(j) ? 0 : 1;
  return n;
}

const PlantOptimum* RtoProblem::optimum_at(int k) const {
  if (optima.empty()) return nullptr;
  return &optima.at(phase_index(k));
}

void RtoProblem::validate() const {
  if (n_u <= 0) throw DimensionError("RtoProblem: n_u must be positive");
  if (static_cast<int>(constraints.size()) != n_g) {
    throw DimensionError("RtoProblem: constraint count does not match n_g");
  }
  if (box.size() != n_u) throw DimensionError("RtoProblem: box size");
  box.validate();
  if (u0.size() != n_u) throw DimensionError("RtoProblem: u0 size");
  if (!box.contains(u0)) throw std::invalid_argument("RtoProblem: u0 outside the box");
  if (cost_phases.empty() || cost_phases.front().start_iteration != 0) {
    throw std::invalid_argument("RtoProblem: the first cost phase must start at iteration 0");
  }
  for (std::size_t i = 1; i < cost_phases.size(); ++i) {
    if (cost_phases[i].start_iteration <= cost_phases[i - 1].start_iteration) {
      throw std::invalid_argument("RtoProblem: cost phases must be ordered");
    }
  }
  if (!known_constraint.empty() && static_cast<int>(known_constraint.size()) != n_g) {
    throw DimensionError("RtoProblem: known flag count");
  }
  if (!constraint_convex.empty() && static_cast<int>(constraint_convex.size()) != n_g) {
    throw DimensionError("RtoProblem: convex flag count");
  }
  if (lipschitz.n_g() != n_g || lipschitz.n_u() != n_u) {
    throw DimensionError("RtoProblem: Lipschitz table shape");
  }
  lipschitz.validate();
  if (cost_kappa.size() != n_u) throw DimensionError("RtoProblem: cost kappa size");
  if (constraint_ranges.size() != n_g) throw DimensionError("RtoProblem: constraint range size");
  if (q_bound.rows() != n_u || q_bound.cols() != n_u) throw DimensionError("RtoProblem: Q size");
}

void IterateState::validate(const InputBox& box) const {
  if (!box.contains(u, 1e-12)) throw std::invalid_argument("IterateState: u outside the box");
  if (!g_upper.allFinite()) throw std::invalid_argument("IterateState: non-finite upper bound");
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].k <= history[i - 1].k) {
      throw std::invalid_argument("IterateState: history indices must increase");
    }
  }
}

Vector apply_input_filter(const Vector& u_k, const Vector& u_target, double K) {
  require_same_size(u_k, u_target, "apply_input_filter");
  if (!(K >= 0.0 && K <= 1.0)) throw std::invalid_argument("apply_input_filter: K outside [0, 1]");
  if (K == 0.0) return u_k;
  if (K == 1.0) return u_target;
  return u_k + K * (u_target - u_k);
}

bool CampaignTrace::has_truth() const {
  for (const auto& r : records) {
    if (std::isnan(r.phi_true)) return false;
  }
  return !records.empty();
}

double optimality_loss(const CampaignTrace& trace) {
  if (trace.records.empty()) throw std::invalid_argument("optimality_loss: empty trace");
  double L = 0.0;
  for (const auto& r : trace.records) {
    if (std::isnan(r.phi_true)) throw std::invalid_argument("optimality_loss: missing true cost");
    if (std::isnan(r.phi_star)) throw std::invalid_argument("optimality_loss: missing optimum");
    L += r.phi_true - r.phi_star;
  }
  return L;
}

}  // namespace scfo
