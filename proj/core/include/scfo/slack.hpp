#pragma once

#include "scfo/types.hpp"

namespace scfo {

// Soft-constraint slack. Hard constraints carry d = d0 = d_total = 0.
struct SlackState {
  Vector d;
  Vector d_total;
  Vector beta;
  Vector d0;

  static SlackState hard(int n_g);
  // Every constraint soft with d0_j = l * eps_bar_j, d_total = ratio * d0, beta at its maximum.
  static SlackState soft_levels(const Vector& eps_bar, double l, double total_ratio = 10.0);

  int size() const { return static_cast<int>(d.size()); }
  bool is_soft(int j) const { return d0(j) > 0.0; }
  bool any_soft() const;
  void validate() const;
};

}  // namespace scfo
