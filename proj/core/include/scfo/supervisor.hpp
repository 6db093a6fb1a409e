#pragma once

#include "scfo/dense_qp.hpp"
#include "scfo/problem.hpp"
#include "scfo/projection.hpp"
#include "scfo/step_filter.hpp"

#include <functional>
#include <string>
#include <vector>

namespace scfo {

enum class InfeasibilityPolicy { DeclareConvergence, PerturbAndRefine, PartialRobustness };

const char* to_string(InfeasibilityPolicy p);
InfeasibilityPolicy parse_policy(const std::string& s);

struct SupervisorConfig {
  ProjectionParams params;  // ceilings and floors; eps/delta/P are reset every iteration
  double p_step = 0.05;
  bool m_mode = false;
  double m_fraction = 0.5;
  double m_max = 1e3;
  InfeasibilityPolicy policy = InfeasibilityPolicy::PartialRobustness;
  bool reuse_history = false;
  bool fully_robust_cost_gain = false;
  double cost_gain_factor = kDefaultCostGainFactor;
  double known_active_tol = 1e-9;  // relative to the constraint ceiling
  int line_search_samples = 1024;
  QpOptions qp;

  void validate() const;
};

enum class IterationStatus { Stepped, Converged, PerturbationRequested };

struct IterationDiagnostics {
  double P = 1.0;
  Vector eps;
  Vector delta_g;
  double delta_phi = 0.0;
  int halvings = 0;
  int p_steps = 0;
  double m = std::numeric_limits<double>::quiet_NaN();
  std::string variant;
  std::vector<int> active_set;
  std::vector<int> active_known;
  Vector u_bar;
  double k_feas = kInf;
  double k_cost = kInf;
  double K = 0.0;
  std::string binding;
  std::vector<std::string> events;
  GradientBox cost_box;                      // boxes at the selected P
  std::vector<GradientBox> constraint_boxes;
  std::vector<GradientBox> full_constraint_boxes;  // un-shrunk robust boxes
};

struct IterationOutcome {
  IterationStatus status = IterationStatus::Stepped;
  Vector u_next;
  IterationDiagnostics diag;
};

// Largest box multiplier m for which the robust descent set stays feasible.
double max_robust_m(const Vector& u_k, const Vector& cost_estimate, const Vector& cost_sigma,
                    const std::vector<Vector>& constraint_estimates,
                    const std::vector<Vector>& constraint_sigmas, const std::vector<int>& active,
                    const ProjectionParams& params, const InputBox& box, double m_max = 1e3,
                    const QpOptions& opts = {});

// One supervised step from state.u toward target. The state's boxes are the
// full robust boxes (or, in m mode, the estimates plus per-derivative scales).
IterationOutcome run_iteration(const IterateState& state, const Vector& target,
                               const SupervisorConfig& cfg, const RtoProblem& problem);

// The first feasible level of the descending P grid, -1 when none is.
int first_feasible_p_level(const Vector& u_k, const GradientBox& cost_box,
                           const std::vector<GradientBox>& constraint_boxes,
                           const std::vector<int>& active, const ProjectionParams& params,
                           const InputBox& box, double p_step, const QpOptions& opts = {});

}  // namespace scfo
