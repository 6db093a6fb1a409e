#pragma once

#include "scfo/types.hpp"

#include <vector>

namespace scfo {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct Monomial {
  double coef = 0.0;
  std::vector<int> powers;
};

// Sparse multivariate polynomial, used for benchmark plants and config-defined problems.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(int n_vars, std::vector<Monomial> terms);

  int n_vars() const { return n_vars_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  int degree() const;

  double value(const Vector& u) const;
  Vector gradient(const Vector& u) const;
  Matrix hessian(const Vector& u) const;
  Polynomial derivative(int var) const;

  // Natural interval extension; exact for the single-variable terms of the benchmarks.
  Interval range_over(const Vector& lo, const Vector& hi) const;

 private:
  int n_vars_ = 0;
  std::vector<Monomial> terms_;
};

Interval interval_pow(Interval x, int p);

}  // namespace scfo
