#include "scfo/uncertainty.hpp"

#include "scfo/problem.hpp"

#include <algorithm>
#include <cmath>

namespace scfo {

GradientBox GradientBox::exact(const Vector& g) { return {g, g, g}; }

bool GradientBox::contains(const Vector& g, double tol) const {
  require_same_size(g, estimate, "GradientBox::contains");
  return ((g - lo).array() >= -tol).all() && ((hi - g).array() >= -tol).all();
}

void GradientBox::validate() const {
  require_same_size(lo, estimate, "GradientBox");
  require_same_size(hi, estimate, "GradientBox");
  if (!lo.allFinite() || !hi.allFinite() || !estimate.allFinite()) {
    throw std::invalid_argument("GradientBox: non-finite entry");
  }
  if (!((estimate - lo).array() >= 0.0).all() || !((hi - estimate).array() >= 0.0).all()) {
    throw std::invalid_argument("GradientBox: estimate outside [lo, hi]");
  }
}

GradientBox build_gradient_box(const Vector& estimate, const Vector& sigma, double m) {
  require_same_size(estimate, sigma, "build_gradient_box");
  if (m < 0.0) throw std::invalid_argument("build_gradient_box: negative multiplier");
  if ((sigma.array() < 0.0).any()) throw std::invalid_argument("build_gradient_box: negative sigma");
  return {estimate - m * sigma, estimate + m * sigma, estimate};
}

GradientBox shrink_box(const GradientBox& box, double P) {
  if (!(P >= 0.0 && P <= 1.0)) throw std::invalid_argument("shrink_box: P outside [0, 1]");
  if (P == 1.0) return box;
  if (P == 0.0) return GradientBox::exact(box.estimate);
  return {box.estimate + P * (box.lo - box.estimate), box.estimate + P * (box.hi - box.estimate),
          box.estimate};
}

double worst_case_directional(const GradientBox& box, const Vector& du) {
  require_same_size(box.estimate, du, "worst_case_directional");
  double s = 0.0;
  for (Eigen::Index i = 0; i < du.size(); ++i) {
    s += std::max(box.lo(i) * du(i), box.hi(i) * du(i));
  }
  return s;
}

LipschitzTable LipschitzTable::symmetric(const Matrix& kappa) {
  if ((kappa.array() < 0.0).any()) throw std::invalid_argument("LipschitzTable: negative constant");
  LipschitzTable t;
  t.kappa_lo = -kappa;
  t.kappa_hi = kappa;
  t.concave_in = BoolMatrix::Constant(kappa.rows(), kappa.cols(), false);
  return t;
}

LipschitzTable LipschitzTable::directional(const Matrix& kappa_lo, const Matrix& kappa_hi) {
  LipschitzTable t;
  t.kappa_lo = kappa_lo;
  t.kappa_hi = kappa_hi;
  t.concave_in = BoolMatrix::Constant(kappa_hi.rows(), kappa_hi.cols(), false);
  t.validate();
  return t;
}

bool LipschitzTable::row_has_concave(int j) const {
  return concave_in.size() > 0 && concave_in.row(j).any();
}

void LipschitzTable::validate() const {
  if (kappa_lo.rows() != kappa_hi.rows() || kappa_lo.cols() != kappa_hi.cols()) {
    throw DimensionError("LipschitzTable: kappa_lo and kappa_hi differ in shape");
  }
  if (concave_in.size() > 0 &&
      (concave_in.rows() != kappa_hi.rows() || concave_in.cols() != kappa_hi.cols())) {
    throw DimensionError("LipschitzTable: concavity flags shape");
  }
  if (!kappa_lo.allFinite() || !kappa_hi.allFinite()) {
    throw std::invalid_argument("LipschitzTable: non-finite constant");
  }
  if (((kappa_hi - kappa_lo).array() < 0.0).any()) {
    throw std::invalid_argument("LipschitzTable: kappa_lo above kappa_hi");
  }
}

double lipschitz_growth(const LipschitzTable& lip, int j, const Vector& du,
                        const GradientBox* grad_box_j, const Vector* local_origin) {
  const int n = lip.n_u();
  if (j < 0 || j >= lip.n_g()) throw DimensionError("lipschitz_growth: bad constraint index");
  if (du.size() != n) throw DimensionError("lipschitz_growth: step size mismatch");
  const bool concave_row = lip.row_has_concave(j);
  if (concave_row && grad_box_j == nullptr) {
    throw std::invalid_argument("lipschitz_growth: gradient box required for concave coordinates");
  }
  Vector box_lo;
  Vector box_hi;
  const bool local = local_origin != nullptr && static_cast<bool>(lip.local_bounds);
  if (local) {
    const Vector end = *local_origin + du;
    box_lo = local_origin->cwiseMin(end);
    box_hi = local_origin->cwiseMax(end);
  }
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (concave_row && lip.concave_in(j, i)) {
      s += std::max(grad_box_j->lo(i) * du(i), grad_box_j->hi(i) * du(i));
      continue;
    }
    double kl = lip.kappa_lo(j, i);
    double kh = lip.kappa_hi(j, i);
    if (local) {
      const auto [a, b] = lip.local_bounds(j, i, box_lo, box_hi);
      kl = std::max(kl, a);
      kh = std::max(kl, std::min(kh, b));
    }
    s += std::max(kl * du(i), kh * du(i));
  }
  return s;
}

QBoundState QBoundState::fixed(const Matrix& Q) {
  QBoundState q;
  q.Q = Q;
  q.validate();
  return q;
}

void QBoundState::validate() const {
  if (Q.rows() != Q.cols()) throw DimensionError("QBoundState: Q must be square");
  if (!Q.isApprox(Q.transpose(), 1e-12) && !(Q - Q.transpose()).isZero(1e-12)) {
    throw std::invalid_argument("QBoundState: Q must be symmetric");
  }
  if (M_lo.has_value() != M_hi.has_value()) {
    throw std::invalid_argument("QBoundState: M bounds come in pairs");
  }
  if (M_lo && (((*M_hi - *M_lo).array() < 0.0).any())) {
    throw std::invalid_argument("QBoundState: M_lo above M_hi");
  }
}

double quad_form_upper(const QBoundState& q, const Vector& du) {
  if (q.M_lo && q.M_hi) {
    const Matrix& lo = *q.M_lo;
    const Matrix& hi = *q.M_hi;
    if (lo.rows() != du.size()) throw DimensionError("quad_form_upper: size mismatch");
    double s = 0.0;
    for (Eigen::Index i = 0; i < du.size(); ++i) {
      for (Eigen::Index l = 0; l < du.size(); ++l) {
        const double p = du(i) * du(l);
        s += std::max(lo(i, l) * p, hi(i, l) * p);
      }
    }
    return s;
  }
  if (q.Q.rows() != du.size()) throw DimensionError("quad_form_upper: size mismatch");
  return du.dot(q.Q * du);
}

QBoundState adapt_qbound(const QBoundState& q, const std::vector<double>& cost_history,
                         double cost_noise_sd) {
  QBoundState out = q;
  if (!q.adaptive || cost_history.empty()) return out;
  const int k = static_cast<int>(cost_history.size()) - 1;
  if (q.best_since_reset_index > k - 1) return out;
  double best = kInf;
  for (int i = q.best_since_reset_index; i <= k - 1; ++i) best = std::min(best, cost_history[i]);
  const double margin = cost_noise_sd > 0.0 ? 3.0 * cost_noise_sd : 0.0;
  const bool triggered = cost_noise_sd > 0.0 ? cost_history[k] - best > margin
                                             : cost_history[k] >= best;
  if (triggered) {
    out.Q = 2.0 * q.Q;
    out.best_since_reset_index = k;
  }
  return out;
}

NoiseModel NoiseModel::noise_free(int n_g) {
  NoiseModel nm;
  nm.w_lo = Vector::Zero(n_g);
  return nm;
}

NoiseModel NoiseModel::gaussian(const Vector& eps_bar, double sigma_g) {
  if (sigma_g < 0.0) throw std::invalid_argument("NoiseModel: negative sigma_g");
  NoiseModel nm;
  nm.sigma_g = sigma_g;
  nm.w_lo = -3.0 * sigma_g * eps_bar;
  return nm;
}

double NoiseModel::mean_lower_bound(int j, int n) const {
  if (n < 1) throw std::invalid_argument("NoiseModel: repetition count must be positive");
  if (w_lo_mean) return w_lo_mean(j, n);
  return w_lo(j) / std::sqrt(static_cast<double>(n));
}

void NoiseModel::validate() const {
  if ((w_lo.array() > 0.0).any()) throw std::invalid_argument("NoiseModel: w_lo must be <= 0");
  if (sigma < 0.0 || sigma_g < 0.0 || m < 0.0) {
    throw std::invalid_argument("NoiseModel: negative scale");
  }
}

namespace {

double growth_from(const HistoryEntry& rec, const LipschitzTable& lip, int j, const Vector& du) {
  if (lip.row_has_concave(j)) {
    if (static_cast<int>(rec.constraint_boxes.size()) > j) {
      return lipschitz_growth(lip, j, du, &rec.constraint_boxes[j]);
    }
    LipschitzTable plain = lip;
    plain.concave_in.setConstant(false);
    return lipschitz_growth(plain, j, du);
  }
  return lipschitz_growth(lip, j, du);
}

}  // namespace

UpperBoundDetail constraint_upper_bound_detail(int j, const IterateState& state,
                                               const NoiseModel& noise,
                                               const LipschitzTable& lip,
                                               const UpperBoundOptions& opts) {
  if (state.history.empty()) throw std::invalid_argument("constraint_upper_bound: empty history");
  const HistoryEntry& last = state.history.back();
  UpperBoundDetail d;
  if (opts.use_trivial) {
    d.trivial = state.prior_slack.size() > j ? state.prior_slack(j) : 0.0;
  }
  d.single = last.g_meas(j) - noise.w_lo(j);
  const int n = std::min<int>(last.repeat_count, static_cast<int>(state.history.size()));
  const int first_repeat = static_cast<int>(state.history.size()) - n;
  if (n > 1) {
    double mean = 0.0;
    for (int i = first_repeat; i < static_cast<int>(state.history.size()); ++i) {
      mean += state.history[i].g_meas(j);
    }
    mean /= n;
    d.averaged = mean - noise.mean_lower_bound(j, n);
  }
  const bool concave_row = lip.row_has_concave(j);
  const int n_u = static_cast<int>(last.u.size());
  Vector du(n_u);
  for (int i = 0; i < first_repeat; ++i) {
    const HistoryEntry& rec = state.history[i];
    if (rec.g_upper.size() <= j) continue;
    double far = 0.0;
    double growth = 0.0;
    for (int c = 0; c < n_u; ++c) {
      du(c) = last.u(c) - rec.u(c);
      far = std::max(far, std::abs(du(c)));
      growth += std::max(lip.kappa_lo(j, c) * du(c), lip.kappa_hi(j, c) * du(c));
    }
    if (far > opts.distance_cutoff) continue;
    if (concave_row && static_cast<int>(rec.constraint_boxes.size()) > j) {
      growth = lipschitz_growth(lip, j, du, &rec.constraint_boxes[j]);
    }
    d.neighbor = std::min(d.neighbor, rec.g_upper(j) + growth);
  }
  d.value = std::min({d.trivial, d.single, d.averaged, d.neighbor});
  return d;
}

double constraint_upper_bound(int j, const IterateState& state, const NoiseModel& noise,
                              const LipschitzTable& lip, const UpperBoundOptions& opts) {
  return constraint_upper_bound_detail(j, state, noise, lip, opts).value;
}

std::vector<int> epsilon_active_set(const Vector& g_upper, const Vector& eps) {
  require_same_size(g_upper, eps, "epsilon_active_set");
  std::vector<int> out;
  for (Eigen::Index j = 0; j < g_upper.size(); ++j) {
    if (g_upper(j) >= -eps(j)) out.push_back(static_cast<int>(j));
  }
  return out;
}

bool feasible_polytope_contains(const HistoryEntry& record, const LipschitzTable& lip,
                                const Vector& u, int j, double allowance) {
  if (record.g_upper.size() <= j) throw std::invalid_argument("feasible_polytope_contains: no bound");
  return record.g_upper(j) + growth_from(record, lip, j, u - record.u) <= allowance;
}

}  // namespace scfo
