#pragma once

#include "scfo/problem.hpp"
#include "scfo/slack.hpp"
#include "scfo/uncertainty.hpp"

#include <vector>

namespace scfo {

inline constexpr double kNullGain = 1e-8;
inline constexpr double kDefaultCostGainFactor = 1.99;

double gain_feasibility(const Vector& g_upper, const Vector& growth, const SlackState& slack);

double gain_cost_decrease(const GradientBox& cost_box, const QBoundState& q, const Vector& du,
                          double factor = kDefaultCostGainFactor);

double compose_gain(double k_feas, double k_cost);

struct LineSearchOptions {
  int samples = 1024;
  double tolerance = 1e-9;
};

// Largest K in [0, 1] with u_k + K du inside, for every constraint, the union of
// the current and past certified polytopes. Never below the local gain.
// current_boxes are the gradient boxes at u_k used for concave coordinates.
double union_line_search(const Vector& u_k, const Vector& u_bar,
                         const std::vector<HistoryEntry>& history, const LipschitzTable& lip,
                         const Vector& g_upper, const std::vector<GradientBox>& current_boxes,
                         const SlackState& slack, const LineSearchOptions& opts = {});

struct KnownConstraint {
  const ScalarFunction* fn = nullptr;
  bool convex = false;
};

enum class KnownLineSearch { MinimizeCost, MaximizeStep };

// Line search along u_k + K (u_bar - u_k), K in [0, min(1, gain_cap)], keeping the
// known constraints nonpositive. MinimizeCost needs the known cost.
double line_search_known_cost(const Vector& u_k, const Vector& u_bar,
                              const ScalarFunction* known_cost, double gain_cap,
                              const std::vector<KnownConstraint>& known_constraints,
                              KnownLineSearch mode = KnownLineSearch::MinimizeCost,
                              int samples = 1024);

SlackState slack_step(const SlackState& slack, const Vector& g_upper_at_uk);

double beta_max(double d0, double d_total);

// True when some soft constraint bound reaches its current slack.
bool needs_fallback(const Vector& g_upper, const SlackState& slack);

// Index into state.history of the best-cost entry whose bounds respect the current slack.
int fallback_reference(const IterateState& state, const SlackState& slack);

}  // namespace scfo
