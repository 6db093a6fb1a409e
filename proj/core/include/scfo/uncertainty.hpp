#pragma once

#include "scfo/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace scfo {

struct IterateState;
struct HistoryEntry;

// Componentwise box around a gradient estimate.
struct GradientBox {
  Vector lo;
  Vector hi;
  Vector estimate;

  static GradientBox exact(const Vector& g);
  int size() const { return static_cast<int>(estimate.size()); }
  bool is_degenerate() const { return (hi - lo).cwiseAbs().maxCoeff() == 0.0; }
  bool contains(const Vector& g, double tol = 0.0) const;
  void validate() const;
};

GradientBox build_gradient_box(const Vector& estimate, const Vector& sigma, double m);
GradientBox shrink_box(const GradientBox& box, double P);

// Tight supremum of g'^T du over g' in the box.
double worst_case_directional(const GradientBox& box, const Vector& du);

// Bounds (lo, hi) on dg_j/du_i over the sub-box [lo, hi] of the input space.
using DerivativeBoundFn =
    std::function<std::pair<double, double>(int j, int i, const Vector& lo, const Vector& hi)>;

struct LipschitzTable {
  Matrix kappa_lo;  // n_g x n_u
  Matrix kappa_hi;
  BoolMatrix concave_in;
  DerivativeBoundFn local_bounds;  // optional refinement on the local box

  static LipschitzTable symmetric(const Matrix& kappa);
  static LipschitzTable directional(const Matrix& kappa_lo, const Matrix& kappa_hi);

  int n_g() const { return static_cast<int>(kappa_hi.rows()); }
  int n_u() const { return static_cast<int>(kappa_hi.cols()); }
  bool row_has_concave(int j) const;
  void validate() const;
};

// Worst-case increase of constraint j over the step du.
// Concave coordinates use the gradient box at the step origin instead of the
// Lipschitz constants. When local_origin is given and the table carries a
// derivative-bound callback, the constants are tightened on the box spanned by
// local_origin and local_origin + du.
double lipschitz_growth(const LipschitzTable& lip, int j, const Vector& du,
                        const GradientBox* grad_box_j = nullptr,
                        const Vector* local_origin = nullptr);

struct QBoundState {
  Matrix Q;
  std::optional<Matrix> M_lo;
  std::optional<Matrix> M_hi;
  int best_since_reset_index = 0;
  bool adaptive = false;

  static QBoundState fixed(const Matrix& Q);
  void validate() const;
};

double quad_form_upper(const QBoundState& q, const Vector& du);

// Doubles Q when the latest cost is not an improvement over the best cost seen
// since the last reset. cost_history[i] is the measured cost at iteration i and
// its last element belongs to the current iteration.
QBoundState adapt_qbound(const QBoundState& q, const std::vector<double>& cost_history,
                         double cost_noise_sd);

struct NoiseModel {
  Vector w_lo;                                 // per constraint, <= 0
  std::function<double(int j, int n)> w_lo_mean;  // defaults to w_lo / sqrt(n)
  double sigma = 0.0;                          // gradient noise scale
  double sigma_g = 0.0;                        // constraint noise scale
  double m = 0.0;
  std::vector<Vector> sigma_grad;              // per function, cost first

  static NoiseModel noise_free(int n_g);
  // Gaussian additive constraint noise N(0, (sigma_g eps_bar_j)^2) with 3-sigma bounds.
  static NoiseModel gaussian(const Vector& eps_bar, double sigma_g);

  double mean_lower_bound(int j, int n) const;
  void validate() const;
};

struct UpperBoundDetail {
  double trivial = kInf;
  double single = kInf;
  double averaged = kInf;
  double neighbor = kInf;
  double value = kInf;
};

struct UpperBoundOptions {
  double distance_cutoff = kInf;  // skip past points farther than this (inf-norm)
  bool use_trivial = true;
};

UpperBoundDetail constraint_upper_bound_detail(int j, const IterateState& state,
                                               const NoiseModel& noise,
                                               const LipschitzTable& lip,
                                               const UpperBoundOptions& opts = {});
double constraint_upper_bound(int j, const IterateState& state, const NoiseModel& noise,
                              const LipschitzTable& lip, const UpperBoundOptions& opts = {});

std::vector<int> epsilon_active_set(const Vector& g_upper, const Vector& eps);

// True when u lies in the polytope certified by the record for constraint j,
// allowing a value up to `allowance` (the soft-constraint slack, 0 when hard).
bool feasible_polytope_contains(const HistoryEntry& record, const LipschitzTable& lip,
                                const Vector& u, int j, double allowance = 0.0);

}  // namespace scfo
