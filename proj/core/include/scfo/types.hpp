#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace scfo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Axis-aligned input box [lo, hi].
struct InputBox {
  Vector lo;
  Vector hi;

  int size() const { return static_cast<int>(lo.size()); }
  bool contains(const Vector& u, double tol = 0.0) const;
  Vector clip(const Vector& u) const;
  Vector span() const { return hi - lo; }
  void validate() const;
};

inline void require_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": size " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

}  // namespace scfo
