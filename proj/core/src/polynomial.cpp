#include "scfo/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace scfo {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

Interval mul(Interval a, Interval b) {
  const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

}  // namespace

Interval interval_pow(Interval x, int p) {
  if (p == 0) return {1.0, 1.0};
  const double a = ipow(x.lo, p);
  const double b = ipow(x.hi, p);
  if (p % 2 == 1) return {a, b};
  if (x.lo <= 0.0 && x.hi >= 0.0) return {0.0, std::max(a, b)};
  return {std::min(a, b), std::max(a, b)};
}

Polynomial::Polynomial(int n_vars, std::vector<Monomial> terms)
    : n_vars_(n_vars), terms_(std::move(terms)) {
  if (n_vars_ <= 0) throw DimensionError("Polynomial: need at least one variable");
  for (const auto& t : terms_) {
    if (static_cast<int>(t.powers.size()) != n_vars_) {
      throw DimensionError("Polynomial: monomial power count does not match variable count");
    }
    for (int p : t.powers) {
      if (p < 0) throw std::invalid_argument("Polynomial: negative power");
    }
  }
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& t : terms_) {
    int s = 0;
    for (int p : t.powers) s += p;
    d = std::max(d, s);
  }
  return d;
}

double Polynomial::value(const Vector& u) const {
  if (u.size() != n_vars_) throw DimensionError("Polynomial::value: wrong input size");
  double v = 0.0;
  for (const auto& t : terms_) {
    double m = t.coef;
    for (int i = 0; i < n_vars_; ++i) m *= ipow(u(i), t.powers[i]);
    v += m;
  }
  return v;
}

Vector Polynomial::gradient(const Vector& u) const {
  if (u.size() != n_vars_) throw DimensionError("Polynomial::gradient: wrong input size");
  Vector g = Vector::Zero(n_vars_);
  for (const auto& t : terms_) {
    for (int i = 0; i < n_vars_; ++i) {
      if (t.powers[i] == 0) continue;
      double m = t.coef * t.powers[i];
      for (int l = 0; l < n_vars_; ++l) {
        m *= ipow(u(l), l == i ? t.powers[l] - 1 : t.powers[l]);
      }
      g(i) += m;
    }
  }
  return g;
}

Matrix Polynomial::hessian(const Vector& u) const {
  if (u.size() != n_vars_) throw DimensionError("Polynomial::hessian: wrong input size");
  Matrix H = Matrix::Zero(n_vars_, n_vars_);
  for (int i = 0; i < n_vars_; ++i) {
    H.row(i) = derivative(i).gradient(u).transpose();
  }
  return H;
}

Polynomial Polynomial::derivative(int var) const {
  if (var < 0 || var >= n_vars_) throw DimensionError("Polynomial::derivative: bad variable");
  std::vector<Monomial> out;
  for (const auto& t : terms_) {
    if (t.powers[var] == 0) continue;
    Monomial m{t.coef * t.powers[var], t.powers};
    m.powers[var] -= 1;
    out.push_back(std::move(m));
  }
  return Polynomial(n_vars_, std::move(out));
}

Interval Polynomial::range_over(const Vector& lo, const Vector& hi) const {
  if (lo.size() != n_vars_ || hi.size() != n_vars_) {
    throw DimensionError("Polynomial::range_over: wrong box size");
  }
  Interval total{0.0, 0.0};
  for (const auto& t : terms_) {
    Interval m{t.coef, t.coef};
    for (int i = 0; i < n_vars_; ++i) {
      if (t.powers[i] == 0) continue;
      m = mul(m, interval_pow({lo(i), hi(i)}, t.powers[i]));
    }
    total.lo += m.lo;
    total.hi += m.hi;
  }
  return total;
}

}  // namespace scfo
