#pragma once

#include "scfo/types.hpp"

#include <optional>

namespace scfo {

// Inequality system A x <= b.
struct LinearSystem {
  Matrix A;
  Vector b;

  LinearSystem() = default;
  LinearSystem(Matrix A_, Vector b_) : A(std::move(A_)), b(std::move(b_)) {}
  static LinearSystem empty(int n_vars);

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }
  void add_row(const Vector& a, double rhs);
  void append(const LinearSystem& other);
  double max_violation(const Vector& x) const;
  void validate() const;
};

struct QpOptions {
  double feasibility_tol = 1e-10;
  double kkt_tol = 1e-8;
  int max_iterations = 0;  // 0 selects a size-based cap
};

enum class QpStatus { Optimal, Infeasible, NumericalFailure };

struct QpResult {
  QpStatus status = QpStatus::NumericalFailure;
  Vector x;
  Vector multipliers;  // one per row of the original system
  int iterations = 0;

  bool ok() const { return status == QpStatus::Optimal; }
};

struct KktReport {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double primal_violation = 0.0;
  double dual_violation = 0.0;

  double max() const;
};

// min 0.5 x'Hx + c'x  s.t. A x <= b, with H positive semidefinite.
// The optional start point skips phase 1 when it is feasible.
QpResult solve_qp(const Matrix& H, const Vector& c, const LinearSystem& sys,
                  const QpOptions& opts = {}, const Vector* start = nullptr);

// Euclidean projection of x0 onto {x : A x <= b}.
QpResult project_point(const Vector& x0, const LinearSystem& sys, const QpOptions& opts = {});

// Some point of the polyhedron, or nullopt when it is empty.
std::optional<Vector> find_feasible_point(const LinearSystem& sys, const QpOptions& opts = {},
                                          const Vector* start = nullptr);

bool is_feasible(const LinearSystem& sys, const QpOptions& opts = {});

KktReport kkt_residuals(const Matrix& H, const Vector& c, const LinearSystem& sys,
                        const Vector& x, const Vector& multipliers);

}  // namespace scfo
