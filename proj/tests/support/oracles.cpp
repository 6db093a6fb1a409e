#include "oracles.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

bool lp_feasible(const Matrix& A_in, const Vector& b_in, double tol) {
  const int m = static_cast<int>(A_in.rows());
  const int n = static_cast<int>(A_in.cols());
  if (m == 0) return true;

  std::vector<int> rows;
  Matrix A(m, n);
  Vector b(m);
  int kept = 0;
  for (int i = 0; i < m; ++i) {
    const double s = A_in.row(i).cwiseAbs().maxCoeff();
    if (s == 0.0) {
      if (b_in(i) < -tol) return false;
      continue;
    }
    A.row(kept) = A_in.row(i) / s;
    b(kept) = b_in(i) / s;
    ++kept;
  }
  if (kept == 0) return true;
  A.conservativeResize(kept, n);
  b.conservativeResize(kept);
  const int r = kept;

  // Columns: x+ (n), x- (n), slack (r), artificial (one per negative rhs), rhs.
  int n_art = 0;
  for (int i = 0; i < r; ++i) n_art += b(i) < 0.0;
  const int n_cols = 2 * n + r + n_art;
  Matrix T = Matrix::Zero(r + 1, n_cols + 1);
  std::vector<int> basis(r);
  int art = 0;
  for (int i = 0; i < r; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    T.block(i, 0, 1, n) = sign * A.row(i);
    T.block(i, n, 1, n) = -sign * A.row(i);
    T(i, 2 * n + i) = sign;
    T(i, n_cols) = sign * b(i);
    if (sign < 0.0) {
      const int col = 2 * n + r + art++;
      T(i, col) = 1.0;
      basis[i] = col;
    } else {
      basis[i] = 2 * n + i;
    }
  }
  // Objective row: reduced costs of sum of artificials.
  for (int i = 0; i < r; ++i) {
    if (basis[i] >= 2 * n + r) T.row(r) -= T.row(i);
  }
  for (int c = 2 * n + r; c < n_cols; ++c) T(r, c) = 0.0;

  const double piv_tol = 1e-11;
  for (int iter = 0; iter < 50000; ++iter) {
    int enter = -1;
    for (int c = 0; c < n_cols; ++c) {
      if (T(r, c) < -piv_tol) {
        enter = c;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < r; ++i) {
      if (T(i, enter) <= piv_tol) continue;
      const double ratio = T(i, n_cols) / T(i, enter);
      if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0) break;  // unbounded direction cannot occur in phase 1
    T.row(leave) /= T(leave, enter);
    for (int i = 0; i <= r; ++i) {
      if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
    }
    basis[leave] = enter;
  }
  const double infeasibility = -T(r, n_cols);
  return infeasibility <= tol;
}

std::pair<Matrix, Vector> vertex_system(const Vector& u_k, const InputBox& box,
                                        const std::vector<RobustRow>& rows) {
  const int n = static_cast<int>(u_k.size());
  const int verts = 1 << n;
  const int m = static_cast<int>(rows.size()) * verts + 2 * n;
  Matrix A(m, n);
  Vector b(m);
  int at = 0;
  for (const auto& row : rows) {
    for (int mask = 0; mask < verts; ++mask) {
      Vector v(n);
      for (int i = 0; i < n; ++i) v(i) = (mask >> i) & 1 ? row.box.hi(i) : row.box.lo(i);
      A.row(at) = v.transpose();
      b(at) = v.dot(u_k) - row.delta;
      ++at;
    }
  }
  for (int i = 0; i < n; ++i) {
    A.row(at).setZero();
    A(at, i) = 1.0;
    b(at++) = box.hi(i);
    A.row(at).setZero();
    A(at, i) = -1.0;
    b(at++) = -box.lo(i);
  }
  return {A, b};
}

namespace {

template <typename F>
void for_each_subset(int m, int k, F&& f) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int l = i + 1; l < k; ++l) idx[l] = idx[l - 1] + 1;
  }
}

double max_violation(const Matrix& A, const Vector& b, const Vector& x) {
  if (A.rows() == 0) return 0.0;
  return (A * x - b).maxCoeff();
}

}  // namespace

std::optional<Projection> face_enumeration_projection(const Vector& x0, const Matrix& A,
                                                      const Vector& b, double tol) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  std::optional<Projection> best;
  auto consider = [&](const Vector& x) {
    if (max_violation(A, b, x) > tol) return;
    const double obj = 0.5 * (x - x0).squaredNorm();
    if (!best || obj < best->objective) best = Projection{x, obj};
  };
  consider(x0);
  for (int k = 1; k <= std::min(n, m); ++k) {
    for_each_subset(m, k, [&](const std::vector<int>& S) {
      Matrix AS(k, n);
      Vector bS(k);
      for (int i = 0; i < k; ++i) {
        AS.row(i) = A.row(S[i]);
        bS(i) = b(S[i]);
      }
      const Matrix G = AS * AS.transpose();
      Eigen::FullPivLU<Matrix> lu(G);
      lu.setThreshold(1e-12);
      if (lu.rank() < k) return;
      const Vector mu = lu.solve(AS * x0 - bS);
      consider(x0 - AS.transpose() * mu);
    });
  }
  return best;
}

std::optional<Projection> grid_projection(const Vector& x0, const Matrix& A, const Vector& b,
                                          const Vector& lo, const Vector& hi, int points) {
  const int n = static_cast<int>(x0.size());
  std::optional<Projection> best;
  std::vector<int> idx(n, 0);
  Vector x(n);
  while (true) {
    for (int i = 0; i < n; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * idx[i] / (points - 1);
    if (max_violation(A, b, x) <= 0.0) {
      const double obj = 0.5 * (x - x0).squaredNorm();
      if (!best || obj < best->objective) best = Projection{x, obj};
    }
    int i = 0;
    while (i < n && ++idx[i] == points) idx[i++] = 0;
    if (i == n) break;
  }
  return best;
}

namespace {

GradientBox scale_box(const GradientBox& g, double P) {
  GradientBox out;
  out.estimate = g.estimate;
  out.lo = g.estimate + P * (g.lo - g.estimate);
  out.hi = g.estimate + P * (g.hi - g.estimate);
  return out;
}

bool robust_feasible(const Vector& u_k, const InputBox& box, const GradientBox& cost,
                     const std::vector<GradientBox>& cons, const std::vector<int>& active,
                     double delta_phi, const Vector& delta_g, double P) {
  std::vector<RobustRow> rows;
  rows.push_back({scale_box(cost, P), delta_phi});
  for (int j : active) rows.push_back({scale_box(cons[j], P), delta_g(j)});
  const auto [A, b] = vertex_system(u_k, box, rows);
  return lp_feasible(A, b);
}

}  // namespace

Schedule scan_schedule(const Vector& u_k, const InputBox& box, const GradientBox& cost_box,
                       const std::vector<GradientBox>& constraint_boxes, const Vector& g_upper,
                       const scfo::ProjectionParams& params, int n_levels) {
  Schedule s;
  Vector eps = params.eps_ceiling;
  Vector delta_g = params.delta_g_ceiling;
  double delta_phi = params.delta_phi_ceiling;
  while (true) {
    s.active.clear();
    for (int j = 0; j < g_upper.size(); ++j) {
      if (g_upper(j) >= -eps(j)) s.active.push_back(j);
    }
    if (robust_feasible(u_k, box, cost_box, constraint_boxes, s.active, delta_phi, delta_g, 0.0)) break;
    eps /= 2.0;
    delta_g /= 2.0;
    delta_phi /= 2.0;
    ++s.halvings;
    const bool below = (eps.array() < params.eps_floor.array()).all() &&
                       (delta_g.array() < params.delta_g_floor.array()).all() &&
                       delta_phi < params.delta_phi_floor;
    if (below) {
      s.floored = true;
      s.P = 0.0;
      return s;
    }
  }
  for (int i = 0; i <= n_levels; ++i) {
    const double P = static_cast<double>(n_levels - i) / n_levels;
    if (robust_feasible(u_k, box, cost_box, constraint_boxes, s.active, delta_phi, delta_g, P)) {
      s.P = P;
      return s;
    }
  }
  s.P = 0.0;
  return s;
}

Vector uniform_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = U(rng);
  return v;
}

}  // namespace oracle
