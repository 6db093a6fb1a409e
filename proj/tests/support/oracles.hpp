#pragma once

#include "scfo/dense_qp.hpp"
#include "scfo/projection.hpp"
#include "scfo/uncertainty.hpp"

#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

// Reference computations used to check the library. None of them share code
// with the solver under test.
namespace oracle {

using scfo::GradientBox;
using scfo::InputBox;
using scfo::Matrix;
using scfo::Vector;

// Phase-1 dense tableau simplex with Bland's rule on free variables.
// True when {x : A x <= b} is nonempty up to tol.
bool lp_feasible(const Matrix& A, const Vector& b, double tol = 1e-9);

struct RobustRow {
  GradientBox box;
  double delta = 0.0;
};

// Semi-infinite descent system written with every vertex of every box:
// v^T (u - u_k) <= -delta for each vertex v, plus lo <= u <= hi.
std::pair<Matrix, Vector> vertex_system(const Vector& u_k, const InputBox& box,
                                        const std::vector<RobustRow>& rows);

// Exact Euclidean projection of x0 onto {A x <= b} by enumerating candidate
// active sets of up to n rows. Empty when no candidate is feasible.
struct Projection {
  Vector x;
  double objective = 0.0;  // 0.5 |x - x0|^2
};
std::optional<Projection> face_enumeration_projection(const Vector& x0, const Matrix& A,
                                                      const Vector& b, double tol = 1e-9);

// Best feasible point of a regular grid on [lo, hi], 0.5 |x - x0|^2 objective.
std::optional<Projection> grid_projection(const Vector& x0, const Matrix& A, const Vector& b,
                                          const Vector& lo, const Vector& hi, int points);

// Brute-force minimum of a function of two variables on a grid over the box,
// subject to the constraint functions being nonpositive.
template <typename Cost, typename Cons>
Vector grid_minimum_2d(const InputBox& box, int points, Cost&& cost, Cons&& cons, double* best_value) {
  Vector best(2);
  double best_v = std::numeric_limits<double>::infinity();
  Vector u(2);
  for (int a = 0; a < points; ++a) {
    u(0) = box.lo(0) + (box.hi(0) - box.lo(0)) * a / (points - 1);
    for (int c = 0; c < points; ++c) {
      u(1) = box.lo(1) + (box.hi(1) - box.lo(1)) * c / (points - 1);
      if (!cons(u)) continue;
      const double v = cost(u);
      if (v < best_v) {
        best_v = v;
        best = u;
      }
    }
  }
  if (best_value) *best_value = best_v;
  return best;
}

// Linear scan of the P grid 1, 1 - step, ..., 0 after the halving search on the
// nominal system, mirroring the supervisor schedule with this file's LP oracle.
struct Schedule {
  bool floored = false;
  int halvings = 0;
  double P = 1.0;
  std::vector<int> active;
};
Schedule scan_schedule(const Vector& u_k, const InputBox& box, const GradientBox& cost_box,
                       const std::vector<GradientBox>& constraint_boxes, const Vector& g_upper,
                       const scfo::ProjectionParams& params, int n_levels);

Vector uniform_vector(std::mt19937_64& rng, int n, double lo, double hi);

}  // namespace oracle
