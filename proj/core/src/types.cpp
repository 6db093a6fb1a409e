#include "scfo/types.hpp"

namespace scfo {

bool InputBox::contains(const Vector& u, double tol) const {
  require_same_size(u, lo, "InputBox::contains");
  return ((u - lo).array() >= -tol).all() && ((hi - u).array() >= -tol).all();
}

Vector InputBox::clip(const Vector& u) const {
  require_same_size(u, lo, "InputBox::clip");
  return u.cwiseMax(lo).cwiseMin(hi);
}

void InputBox::validate() const {
  require_same_size(lo, hi, "InputBox");
  if (!lo.allFinite() || !hi.allFinite()) throw std::invalid_argument("InputBox: non-finite bound");
  if (!((hi - lo).array() > 0.0).all()) throw std::invalid_argument("InputBox: lo must be below hi");
}

}  // namespace scfo
