#include "scfo/dense_qp.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <vector>

namespace scfo {

LinearSystem LinearSystem::empty(int n_vars) { return {Matrix(0, n_vars), Vector(0)}; }

void LinearSystem::add_row(const Vector& a, double rhs) {
  if (A.cols() != a.size()) throw DimensionError("LinearSystem::add_row: width mismatch");
  A.conservativeResize(A.rows() + 1, Eigen::NoChange);
  b.conservativeResize(b.size() + 1);
  A.row(A.rows() - 1) = a.transpose();
  b(b.size() - 1) = rhs;
}

void LinearSystem::append(const LinearSystem& other) {
  if (other.A.cols() != A.cols()) throw DimensionError("LinearSystem::append: width mismatch");
  const Eigen::Index r = A.rows();
  A.conservativeResize(r + other.A.rows(), Eigen::NoChange);
  b.conservativeResize(r + other.b.size());
  A.bottomRows(other.A.rows()) = other.A;
  b.tail(other.b.size()) = other.b;
}

double LinearSystem::max_violation(const Vector& x) const {
  if (rows() == 0) return 0.0;
  return std::max(0.0, (A * x - b).maxCoeff());
}

void LinearSystem::validate() const {
  if (A.rows() != b.size()) throw DimensionError("LinearSystem: row count differs from rhs length");
  if (!A.allFinite() || !b.allFinite()) throw std::invalid_argument("LinearSystem: non-finite entry");
}

double KktReport::max() const {
  return std::max({stationarity, complementarity, primal_violation, dual_violation});
}

namespace {

enum class Curvature { Identity, Zero, General };

struct NormalizedRows {
  Matrix A;
  Vector b;
  std::vector<int> source;  // original row index
  Vector scale;             // original row norm
  bool contradictory = false;
};

NormalizedRows normalize(const LinearSystem& sys, double feas_tol) {
  NormalizedRows out;
  const int m = sys.rows();
  const int n = sys.cols();
  std::vector<int> keep;
  std::vector<double> norms;
  for (int i = 0; i < m; ++i) {
    const double nrm = sys.A.row(i).norm();
    if (nrm <= 1e-300) {
      if (sys.b(i) < -feas_tol) out.contradictory = true;
      continue;
    }
    keep.push_back(i);
    norms.push_back(nrm);
  }
  out.A.resize(static_cast<Eigen::Index>(keep.size()), n);
  out.b.resize(static_cast<Eigen::Index>(keep.size()));
  out.scale.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.A.row(r) = sys.A.row(keep[r]) / norms[r];
    out.b(r) = sys.b(keep[r]) / norms[r];
    out.scale(r) = norms[r];
  }
  out.source = std::move(keep);
  return out;
}

struct ActiveSetOutcome {
  QpStatus status = QpStatus::NumericalFailure;
  Vector x;
  std::vector<int> working;
  Vector lambda;  // aligned with working
  int iterations = 0;
};

// Primal active-set iterations from a (nearly) feasible x. Ties in both the
// ratio test and the choice of the constraint to release go to the lowest index.
ActiveSetOutcome active_set(const Matrix& H, const Vector& c, const Matrix& A, const Vector& b,
                            Vector x, Curvature curvature, int max_iter) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(A.rows());
  std::vector<int> W;
  std::vector<char> in_w(static_cast<std::size_t>(m), 0);
  ActiveSetOutcome out;

  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter + 1;
    const Vector g = (curvature == Curvature::Zero) ? c : Vector(H * x + c);
    const int w = static_cast<int>(W.size());

    Matrix AwT(n, w);
    for (int i = 0; i < w; ++i) AwT.col(i) = A.row(W[i]).transpose();
    Eigen::HouseholderQR<Matrix> qr;
    Matrix Q = Matrix::Identity(n, n);
    if (w > 0) {
      qr.compute(AwT);
      Q = qr.householderQ() * Matrix::Identity(n, n);
    }
    const int nz = n - w;

    Vector p = Vector::Zero(n);
    bool unbounded_direction = false;
    if (nz > 0) {
      const Matrix Z = Q.rightCols(nz);
      const Vector r = Z.transpose() * g;
      if (curvature == Curvature::Identity) {
        p = -Z * r;
      } else if (curvature == Curvature::Zero) {
        p = -Z * r;
        unbounded_direction = true;
      } else {
        const Matrix R = Z.transpose() * H * Z;
        Eigen::SelfAdjointEigenSolver<Matrix> es(R);
        const Vector& ev = es.eigenvalues();
        const Matrix& V = es.eigenvectors();
        const double curv_tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
        const double grad_tol = 1e-13 * std::max(1.0, g.cwiseAbs().maxCoeff());
        Vector y = Vector::Zero(nz);
        Vector dir = Vector::Zero(nz);
        for (int i = 0; i < nz; ++i) {
          const double ri = V.col(i).dot(r);
          if (ev(i) > curv_tol) {
            y -= (ri / ev(i)) * V.col(i);
          } else if (std::abs(ri) > grad_tol) {
            dir -= ri * V.col(i);
            unbounded_direction = true;
          }
        }
        p = Z * (unbounded_direction ? dir : y);
      }
    }

    const double step_tol = 1e-14 * (1.0 + x.cwiseAbs().maxCoeff());
    if (p.cwiseAbs().maxCoeff() <= step_tol) {
      Vector lambda(w);
      if (w > 0) {
        const Vector rhs = -(Q.leftCols(w).transpose() * g);
        lambda = qr.matrixQR().topLeftCorner(w, w).triangularView<Eigen::Upper>().solve(rhs);
      }
      const double dual_tol = 1e-11 * std::max(1.0, g.cwiseAbs().maxCoeff());
      int drop = -1;
      for (int i = 0; i < w; ++i) {
        if (lambda(i) < -dual_tol && (drop < 0 || W[i] < W[drop])) drop = i;
      }
      if (drop < 0) {
        out.status = QpStatus::Optimal;
        out.x = std::move(x);
        out.working = std::move(W);
        out.lambda = std::move(lambda);
        return out;
      }
      in_w[static_cast<std::size_t>(W[drop])] = 0;
      W.erase(W.begin() + drop);
      continue;
    }

    double alpha = unbounded_direction ? kInf : 1.0;
    int block = -1;
    const double pn = p.norm();
    for (int i = 0; i < m; ++i) {
      if (in_w[static_cast<std::size_t>(i)]) continue;
      const double ap = A.row(i).dot(p);
      if (ap <= 1e-12 * pn) continue;
      const double slack = std::max(0.0, b(i) - A.row(i).dot(x));
      const double t = slack / ap;
      if (t < alpha) {
        alpha = t;
        block = i;
      }
    }
    if (!std::isfinite(alpha)) {
      out.status = QpStatus::NumericalFailure;  // unbounded below
      out.x = std::move(x);
      return out;
    }
    x += alpha * p;
    if (block >= 0) {
      W.push_back(block);
      in_w[static_cast<std::size_t>(block)] = 1;
    }
  }
  out.status = QpStatus::NumericalFailure;
  out.x = std::move(x);
  return out;
}

int iteration_cap(const QpOptions& opts, int n, int m) {
  return opts.max_iterations > 0 ? opts.max_iterations : 50 * (n + m) + 100;
}

// Phase 1: min t s.t. a_i'x - t <= b_i, t >= 0 over normalized rows.
std::optional<Vector> phase_one(const NormalizedRows& rows, const Vector& x_start,
                                const QpOptions& opts) {
  const int n = static_cast<int>(x_start.size());
  const int m = static_cast<int>(rows.A.rows());
  if (rows.contradictory) return std::nullopt;
  if (m == 0) return x_start;
  const double viol = (rows.A * x_start - rows.b).maxCoeff();
  if (viol <= opts.feasibility_tol) return x_start;

  Matrix A1 = Matrix::Zero(m + 1, n + 1);
  Vector b1 = Vector::Zero(m + 1);
  A1.topLeftCorner(m, n) = rows.A;
  A1.col(n).head(m).setConstant(-1.0);
  b1.head(m) = rows.b;
  A1(m, n) = -1.0;
  Vector c1 = Vector::Zero(n + 1);
  c1(n) = 1.0;
  Vector z(n + 1);
  z.head(n) = x_start;
  z(n) = viol;
  const Matrix H1 = Matrix::Zero(n + 1, n + 1);
  const auto res = active_set(H1, c1, A1, b1, z, Curvature::Zero, iteration_cap(opts, n + 1, m + 1));
  if (res.status != QpStatus::Optimal) throw NumericalFailure("phase one did not converge");
  if (res.x(n) > opts.feasibility_tol) return std::nullopt;
  return Vector(res.x.head(n));
}

Curvature classify(const Matrix& H) {
  if (H.isZero(0.0)) return Curvature::Zero;
  if (H.isIdentity(0.0)) return Curvature::Identity;
  return Curvature::General;
}

}  // namespace

QpResult solve_qp(const Matrix& H, const Vector& c, const LinearSystem& sys, const QpOptions& opts,
                  const Vector* start) {
  sys.validate();
  const int n = sys.cols();
  if (H.rows() != n || H.cols() != n || c.size() != n) throw DimensionError("solve_qp: size mismatch");
  if (start && start->size() != n) throw DimensionError("solve_qp: start size mismatch");

  QpResult result;
  const NormalizedRows rows = normalize(sys, opts.feasibility_tol);
  const Vector x_start = start ? *start : Vector(Vector::Zero(n));
  const auto feasible = phase_one(rows, x_start, opts);
  if (!feasible) {
    result.status = QpStatus::Infeasible;
    return result;
  }

  const auto res = active_set(H, c, rows.A, rows.b, *feasible, classify(H),
                              iteration_cap(opts, n, static_cast<int>(rows.A.rows())));
  result.iterations = res.iterations;
  result.x = res.x;
  if (res.status != QpStatus::Optimal) {
    result.status = res.status;
    return result;
  }
  result.multipliers = Vector::Zero(sys.rows());
  for (std::size_t i = 0; i < res.working.size(); ++i) {
    const int r = res.working[i];
    result.multipliers(rows.source[static_cast<std::size_t>(r)]) =
        res.lambda(static_cast<Eigen::Index>(i)) / rows.scale(r);
  }
  result.status = QpStatus::Optimal;
  return result;
}

QpResult project_point(const Vector& x0, const LinearSystem& sys, const QpOptions& opts) {
  const int n = sys.cols();
  if (x0.size() != n) throw DimensionError("project_point: size mismatch");
  const Matrix H = Matrix::Identity(n, n);
  return solve_qp(H, -x0, sys, opts, &x0);
}

std::optional<Vector> find_feasible_point(const LinearSystem& sys, const QpOptions& opts,
                                          const Vector* start) {
  sys.validate();
  const int n = sys.cols();
  const NormalizedRows rows = normalize(sys, opts.feasibility_tol);
  const Vector x_start = start ? *start : Vector(Vector::Zero(n));
  return phase_one(rows, x_start, opts);
}

bool is_feasible(const LinearSystem& sys, const QpOptions& opts) {
  return find_feasible_point(sys, opts).has_value();
}

KktReport kkt_residuals(const Matrix& H, const Vector& c, const LinearSystem& sys, const Vector& x,
                        const Vector& multipliers) {
  KktReport r;
  Vector grad = H * x + c;
  if (sys.rows() > 0) {
    grad += sys.A.transpose() * multipliers;
    const Vector slack = sys.A * x - sys.b;
    r.primal_violation = std::max(0.0, slack.maxCoeff());
    r.complementarity = (multipliers.array() * slack.array()).abs().maxCoeff();
    r.dual_violation = std::max(0.0, -multipliers.minCoeff());
  }
  r.stationarity = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  return r;
}

}  // namespace scfo
