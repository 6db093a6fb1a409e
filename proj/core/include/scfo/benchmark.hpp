#pragma once

#include "scfo/campaign.hpp"
#include "scfo/polynomial.hpp"
#include "scfo/problem.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace scfo {

struct PolynomialPhase {
  int start_iteration = 0;
  Polynomial cost;
};

// Declarative problem description; everything else is derived by build_problem.
struct ProblemDefinition {
  std::string name;
  int n_u = 0;
  InputBox box;
  Vector u0;
  int k_f = 100;
  std::vector<PolynomialPhase> cost_phases;
  std::vector<Polynomial> constraints;
  bool known_cost = false;
  std::vector<bool> known_constraint;
  std::optional<Matrix> kappa_lo;  // derived from interval bounds when absent
  std::optional<Matrix> kappa_hi;
  bool directional_kappa = false;  // keep derived signed bounds instead of symmetric ones
  BoolMatrix concave_in;
  std::optional<Vector> cost_kappa;
  std::optional<Matrix> q_bound;   // cost Hessian bound, derived for quadratic costs
};

// Benchmark names: "A", "B", and "B-changing" (second cost from iteration 50).
ProblemDefinition benchmark_definition(const std::string& name);

// Derives ranges, Lipschitz table, convexity flags and plant optima.
RtoProblem build_problem(const ProblemDefinition& def);

// Cached build of a named benchmark.
const RtoProblem& benchmark_problem(const std::string& name);

// Ranges max |p| over an evenly spaced grid with `points` values per input.
double polynomial_range(const Polynomial& p, const InputBox& box, int points = 200);

// Dense grid search followed by Newton polishing on the KKT system of each
// candidate active subset (plant constraints and box bounds).
PlantOptimum polish_optimum(const Polynomial& cost, const std::vector<Polynomial>& constraints,
                            const InputBox& box, double grid_step = 1e-3, double tol = 1e-10);

// Table style derivative bounds: symmetric kappa_ji = max |dg_j/du_i| over the box.
std::pair<Matrix, Matrix> interval_derivative_bounds(const std::vector<Polynomial>& constraints,
                                                     const InputBox& box);

struct ExperimentCell {
  std::string label;
  std::string problem = "A";
  std::optional<ProblemDefinition> definition;  // overrides the named benchmark
  CampaignConfig config;
  std::vector<std::string> known;                 // "phi", "g1", ...
  std::vector<std::pair<int, int>> concave;       // (constraint, input), zero based
  double slack_l = 0.0;
};

struct ExperimentSummary {
  std::string label;
  int replicates = 0;
  std::vector<double> losses;
  double mean_loss = 0.0;
  double median_loss = 0.0;
  int violations = 0;            // iterates with a true hard-constraint value above 1e-9
  int premature = 0;             // replicates ending farther than 0.05 from the optimum
  std::vector<double> max_violation_integral;  // per constraint, worst replicate
  double seconds = 0.0;
};

inline constexpr double kPrematureRadius = 0.05;

// Applies the cell's known elements, concavity declarations and slack to a fresh problem.
RtoProblem cell_problem(const ExperimentCell& cell);
CampaignConfig cell_config(const ExperimentCell& cell, const RtoProblem& problem);

std::uint64_t replicate_seed(std::uint64_t seed_base, int cell_index, int replicate);

// Runs the replicates of one cell. When out_dir is non-empty each trace is
// written there as <label>_r<replicate>.csv.
ExperimentSummary run_experiment(const ExperimentCell& cell, int replicates,
                                 const std::string& out_dir, std::uint64_t seed_base = 1,
                                 int cell_index = 0);

// Named study presets: table1 .. table8.
std::vector<ExperimentCell> preset_grid(const std::string& name);

std::vector<double> violation_integrals(const CampaignTrace& trace);
double median(std::vector<double> values);

}  // namespace scfo
