#pragma once

#include "scfo/slack.hpp"
#include "scfo/types.hpp"
#include "scfo/uncertainty.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace scfo {

struct ScalarFunction {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;

  explicit operator bool() const { return static_cast<bool>(value); }
};

struct CostPhase {
  int start_iteration = 0;
  ScalarFunction cost;
  bool convex = false;
};

struct PlantOptimum {
  Vector u;
  double phi = 0.0;
};

struct RtoProblem {
  std::string name;
  int n_u = 0;
  int n_g = 0;
  std::vector<CostPhase> cost_phases;  // ordered by start_iteration, first starts at 0
  std::vector<ScalarFunction> constraints;
  InputBox box;
  Vector u0;

  bool known_cost = false;
  std::vector<bool> known_constraint;
  std::vector<bool> constraint_convex;

  LipschitzTable lipschitz;
  Vector cost_kappa;         // derivative bounds of the cost, scales gradient noise
  Vector constraint_ranges;  // max |g_j| on the box
  double cost_range = 1.0;
  Matrix q_bound;            // default quadratic upper bound on the cost
  std::vector<PlantOptimum> optima;  // one per cost phase, simulation only

  int phase_index(int k) const;
  const CostPhase& phase_at(int k) const { return cost_phases.at(phase_index(k)); }
  double cost(const Vector& u, int k) const { return phase_at(k).cost.value(u); }
  Vector cost_gradient(const Vector& u, int k) const { return phase_at(k).cost.gradient(u); }
  Vector constraint_values(const Vector& u) const;
  Vector constraint_gradient(int j, const Vector& u) const;
  bool any_known_constraint() const;
  bool is_known(int j) const { return !known_constraint.empty() && known_constraint[j]; }
  int uncertain_count() const;
  const PlantOptimum* optimum_at(int k) const;
  void validate() const;
};

// Values a campaign measures at one input; truth is empty in real-plant mode.
struct Truth {
  double phi = 0.0;
  Vector g;
};

struct HistoryEntry {
  int k = 0;
  Vector u;
  Vector g_meas;
  double phi_meas = 0.0;
  int repeat_count = 1;  // consecutive measurements at this u, this one included
  Vector g_upper;        // upper bounds recorded for this point
  std::vector<GradientBox> constraint_boxes;  // robust boxes at u, may be empty
  std::optional<Truth> truth;
};

struct IterateState {
  int k = 0;
  Vector u;
  std::vector<HistoryEntry> history;
  Vector g_upper;
  GradientBox cost_box;
  std::vector<GradientBox> constraint_boxes;
  Vector cost_sigma;                    // per-derivative scales, Implementation IV
  std::vector<Vector> constraint_sigma;
  SlackState slack;
  Vector prior_slack;                   // slack used for the step into u
  QBoundState qbound;

  void validate(const InputBox& box) const;
};

Vector apply_input_filter(const Vector& u_k, const Vector& u_target, double K);

struct TraceRecord {
  int k = 0;
  Vector u;
  double phi_true = std::numeric_limits<double>::quiet_NaN();
  Vector g_true;
  double phi_meas = 0.0;
  Vector g_meas;
  double K = 0.0;
  double P = 1.0;
  double eps_min = 0.0;
  std::string variant;
  Vector slack_d;
  std::string binding;
  std::string event;
  Vector g_upper;
  double phi_star = std::numeric_limits<double>::quiet_NaN();
  GradientBox cost_box;
  std::vector<GradientBox> constraint_boxes;
};

struct CampaignTrace {
  std::string problem;
  std::vector<TraceRecord> records;

  bool has_truth() const;
};

// Sum over records of phi_true - phi_star.
double optimality_loss(const CampaignTrace& trace);

}  // namespace scfo
