#pragma once

#include "scfo/problem.hpp"

#include <string>
#include <vector>

namespace scfo {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Iterates whose true value of any constraint exceeds tol.
int count_violations(const CampaignTrace& trace, double tol = 1e-9);

// Steps with K > 0 after which the true cost rose by more than tol.
int count_cost_increases(const CampaignTrace& trace, double tol = 1e-12);

struct VerifyOptions {
  bool quick = false;  // shorter horizons for smoke runs
  std::uint64_t seed = 1;
};

// Feasibility, monotone descent, determinism and soft-constraint budget checks
// on the built-in benchmarks.
std::vector<CheckResult> run_invariant_suite(const VerifyOptions& opts);

}  // namespace scfo
