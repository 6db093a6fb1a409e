#include "scfo/projection.hpp"

#include <algorithm>

namespace scfo {

ProjectionParams ProjectionParams::from_ranges(const Vector& g_ranges, double phi_range,
                                               double floor_ratio) {
  if ((g_ranges.array() <= 0.0).any() || phi_range <= 0.0) {
    throw std::invalid_argument("ProjectionParams: ranges must be positive");
  }
  if (!(floor_ratio > 0.0 && floor_ratio < 1.0)) {
    throw std::invalid_argument("ProjectionParams: floor ratio must lie in (0, 1)");
  }
  ProjectionParams p;
  p.eps_ceiling = g_ranges;
  p.delta_g_ceiling = g_ranges;
  p.delta_phi_ceiling = phi_range;
  p.eps_floor = floor_ratio * g_ranges;
  p.delta_g_floor = floor_ratio * g_ranges;
  p.delta_phi_floor = floor_ratio * phi_range;
  p.reset_to_ceilings();
  return p;
}

void ProjectionParams::reset_to_ceilings() {
  eps = eps_ceiling;
  delta_g = delta_g_ceiling;
  delta_phi = delta_phi_ceiling;
  P = 1.0;
}

void ProjectionParams::halve() {
  eps *= 0.5;
  delta_g *= 0.5;
  delta_phi *= 0.5;
}

bool ProjectionParams::below_floors() const {
  return (eps.array() < eps_floor.array()).all() &&
         (delta_g.array() < delta_g_floor.array()).all() && delta_phi < delta_phi_floor;
}

double ProjectionParams::eps_min() const { return eps.size() > 0 ? eps.minCoeff() : 0.0; }

void ProjectionParams::validate() const {
  const auto n = eps.size();
  if (delta_g.size() != n || eps_ceiling.size() != n || delta_g_ceiling.size() != n ||
      eps_floor.size() != n || delta_g_floor.size() != n) {
    throw DimensionError("ProjectionParams: vector sizes differ");
  }
  if ((eps_floor.array() <= 0.0).any() || (delta_g_floor.array() <= 0.0).any() ||
      delta_phi_floor <= 0.0) {
    throw std::invalid_argument("ProjectionParams: floors must be positive");
  }
  if ((eps_floor.array() >= eps_ceiling.array()).any() ||
      (delta_g_floor.array() >= delta_g_ceiling.array()).any() ||
      delta_phi_floor >= delta_phi_ceiling) {
    throw std::invalid_argument("ProjectionParams: floors must lie below ceilings");
  }
  if (!(P >= 0.0 && P <= 1.0)) throw std::invalid_argument("ProjectionParams: P outside [0, 1]");
}

DescentSet::DescentSet(Vector u_k, InputBox box) : u_k_(std::move(u_k)), box_(std::move(box)) {
  require_same_size(u_k_, box_.lo, "DescentSet");
}

void DescentSet::add_exact(const Vector& grad, double delta) {
  require_same_size(grad, u_k_, "DescentSet::add_exact");
  exact_.push_back({grad, delta});
}

void DescentSet::add_robust(const GradientBox& box, double delta) {
  require_same_size(box.estimate, u_k_, "DescentSet::add_robust");
  if (box.is_degenerate()) {
    exact_.push_back({box.estimate, delta});
    return;
  }
  robust_.push_back({box, delta});
}

int DescentSet::row_count() const {
  return 2 * n_u() + static_cast<int>(exact_.size()) +
         static_cast<int>(robust_.size()) * (2 * n_u() + 1);
}

LinearSystem DescentSet::system() const {
  const int n = n_u();
  const int nv = n + slack_count();
  Matrix A = Matrix::Zero(row_count(), nv);
  Vector b = Vector::Zero(row_count());
  int r = 0;
  for (int i = 0; i < n; ++i) {
    A(r, i) = 1.0;
    b(r++) = box_.hi(i);
    A(r, i) = -1.0;
    b(r++) = -box_.lo(i);
  }
  for (const auto& e : exact_) {
    A.row(r).head(n) = e.grad.transpose();
    b(r++) = e.grad.dot(u_k_) - e.delta;
  }
  int s0 = n;
  for (const auto& rr : robust_) {
    for (int i = 0; i < n; ++i) {
      A(r, i) = rr.box.lo(i);
      A(r, s0 + i) = -1.0;
      b(r++) = rr.box.lo(i) * u_k_(i);
      A(r, i) = rr.box.hi(i);
      A(r, s0 + i) = -1.0;
      b(r++) = rr.box.hi(i) * u_k_(i);
    }
    A.row(r).segment(s0, n).setOnes();
    b(r++) = -rr.delta;
    s0 += n;
  }
  return {std::move(A), std::move(b)};
}

bool DescentSet::feasible(const QpOptions& opts) const { return is_feasible(system(), opts); }

std::optional<Vector> DescentSet::project(const Vector& target, const QpOptions& opts) const {
  require_same_size(target, u_k_, "DescentSet::project");
  const int n = n_u();
  const int nv = n + slack_count();
  const LinearSystem sys = system();
  Vector start(nv);
  start.head(n) = target;
  const Vector du = target - u_k_;
  int s0 = n;
  for (const auto& rr : robust_) {
    for (int i = 0; i < n; ++i) {
      start(s0 + i) = std::max(rr.box.lo(i) * du(i), rr.box.hi(i) * du(i));
    }
    s0 += n;
  }
  QpResult res;
  if (slack_count() == 0) {
    res = project_point(target, sys, opts);
  } else {
    Matrix H = Matrix::Zero(nv, nv);
    H.topLeftCorner(n, n).setIdentity();
    Vector c = Vector::Zero(nv);
    c.head(n) = -target;
    res = solve_qp(H, c, sys, opts, &start);
  }
  if (res.status == QpStatus::Infeasible) return std::nullopt;
  if (res.status != QpStatus::Optimal) throw NumericalFailure("projection solve failed");
  return box_.clip(res.x.head(n));
}

namespace {

void check_active(const std::vector<int>& active, std::size_t n) {
  for (int j : active) {
    if (j < 0 || static_cast<std::size_t>(j) >= n) throw DimensionError("projection: bad active index");
  }
}

}  // namespace

std::optional<Vector> project_nominal(const Vector& u_target, const Vector& u_k,
                                      const Vector& cost_grad,
                                      const std::vector<Vector>& constraint_grads,
                                      const std::vector<int>& active,
                                      const ProjectionParams& params, const InputBox& box,
                                      const QpOptions& opts) {
  check_active(active, constraint_grads.size());
  DescentSet set(u_k, box);
  set.add_exact(cost_grad, params.delta_phi);
  for (int j : active) set.add_exact(constraint_grads[j], params.delta_g(j));
  return set.project(u_target, opts);
}

std::optional<Vector> project_robust(const Vector& u_target, const Vector& u_k,
                                     const GradientBox& cost_box,
                                     const std::vector<GradientBox>& constraint_boxes,
                                     const std::vector<int>& active,
                                     const ProjectionParams& params, const InputBox& box,
                                     const QpOptions& opts) {
  check_active(active, constraint_boxes.size());
  DescentSet set(u_k, box);
  set.add_robust(cost_box, params.delta_phi);
  for (int j : active) set.add_robust(constraint_boxes[j], params.delta_g(j));
  return set.project(u_target, opts);
}

std::optional<Vector> project_known_cost(const Vector& u_target, const Vector& u_k,
                                         const std::vector<GradientBox>& constraint_boxes,
                                         const std::vector<int>& active,
                                         const ProjectionParams& params, const InputBox& box,
                                         const QpOptions& opts) {
  check_active(active, constraint_boxes.size());
  DescentSet set(u_k, box);
  for (int j : active) set.add_robust(constraint_boxes[j], params.delta_g(j));
  return set.project(u_target, opts);
}

DescentSet known_constraints_set(const Vector& u_k, const KnownGradientData& grad_data,
                                 const std::vector<int>& active_uncertain,
                                 const std::vector<int>& active_known,
                                 const ProjectionParams& params, const InputBox& box) {
  check_active(active_uncertain, grad_data.constraint_boxes.size());
  check_active(active_known, grad_data.known_gradients.size());
  DescentSet set(u_k, box);
  switch (grad_data.cost_row) {
    case CostRow::Robust:
      set.add_robust(grad_data.cost_box, params.delta_phi);
      break;
    case CostRow::Exact:
      set.add_exact(grad_data.cost_gradient, params.delta_phi);
      break;
    case CostRow::Absent:
      break;
  }
  for (int j : active_uncertain) set.add_robust(grad_data.constraint_boxes[j], params.delta_g(j));
  for (int j : active_known) set.add_exact(grad_data.known_gradients[j], params.delta_g(j));
  return set;
}

std::optional<Vector> project_known_constraints(const Vector& u_target, const Vector& u_k,
                                                const KnownGradientData& grad_data,
                                                const std::vector<int>& active_uncertain,
                                                const std::vector<int>& active_known,
                                                const ProjectionParams& params,
                                                const InputBox& box, const QpOptions& opts) {
  return known_constraints_set(u_k, grad_data, active_uncertain, active_known, params, box)
      .project(u_target, opts);
}

}  // namespace scfo
