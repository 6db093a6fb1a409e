#pragma once

#include "scfo/dense_qp.hpp"
#include "scfo/types.hpp"
#include "scfo/uncertainty.hpp"

#include <optional>
#include <vector>

namespace scfo {

struct ProjectionParams {
  Vector eps;
  Vector delta_g;
  double delta_phi = 1.0;

  Vector eps_ceiling;
  Vector delta_g_ceiling;
  double delta_phi_ceiling = 1.0;

  Vector eps_floor;
  Vector delta_g_floor;
  double delta_phi_floor = 1e-6;

  double P = 1.0;

  // Ceilings equal to the function ranges, floors a fixed fraction of them.
  static ProjectionParams from_ranges(const Vector& g_ranges, double phi_range,
                                      double floor_ratio = 1e-6);

  int n_g() const { return static_cast<int>(eps.size()); }
  void reset_to_ceilings();
  void halve();
  bool below_floors() const;
  double eps_min() const;
  void validate() const;
};

// Constraint set {u in box : every descent row holds} written over (u, slacks).
// Robust rows with a degenerate box are stored as exact rows.
class DescentSet {
 public:
  DescentSet(Vector u_k, InputBox box);

  void add_exact(const Vector& grad, double delta);
  void add_robust(const GradientBox& box, double delta);

  int n_u() const { return static_cast<int>(u_k_.size()); }
  int slack_count() const { return n_u() * static_cast<int>(robust_.size()); }
  int row_count() const;
  LinearSystem system() const;

  bool feasible(const QpOptions& opts = {}) const;
  std::optional<Vector> project(const Vector& target, const QpOptions& opts = {}) const;

 private:
  struct RobustRow {
    GradientBox box;
    double delta;
  };
  struct ExactRow {
    Vector grad;
    double delta;
  };

  Vector u_k_;
  InputBox box_;
  std::vector<ExactRow> exact_;
  std::vector<RobustRow> robust_;
};

std::optional<Vector> project_nominal(const Vector& u_target, const Vector& u_k,
                                      const Vector& cost_grad,
                                      const std::vector<Vector>& constraint_grads,
                                      const std::vector<int>& active,
                                      const ProjectionParams& params, const InputBox& box,
                                      const QpOptions& opts = {});

std::optional<Vector> project_robust(const Vector& u_target, const Vector& u_k,
                                     const GradientBox& cost_box,
                                     const std::vector<GradientBox>& constraint_boxes,
                                     const std::vector<int>& active,
                                     const ProjectionParams& params, const InputBox& box,
                                     const QpOptions& opts = {});

std::optional<Vector> project_known_cost(const Vector& u_target, const Vector& u_k,
                                         const std::vector<GradientBox>& constraint_boxes,
                                         const std::vector<int>& active,
                                         const ProjectionParams& params, const InputBox& box,
                                         const QpOptions& opts = {});

enum class CostRow { Robust, Exact, Absent };

struct KnownGradientData {
  CostRow cost_row = CostRow::Robust;
  GradientBox cost_box;                    // used when cost_row is Robust
  Vector cost_gradient;                    // used when cost_row is Exact
  std::vector<GradientBox> constraint_boxes;  // uncertain constraints, indexed by j
  std::vector<Vector> known_gradients;        // known constraints, indexed by j
};

std::optional<Vector> project_known_constraints(const Vector& u_target, const Vector& u_k,
                                                const KnownGradientData& grad_data,
                                                const std::vector<int>& active_uncertain,
                                                const std::vector<int>& active_known,
                                                const ProjectionParams& params,
                                                const InputBox& box,
                                                const QpOptions& opts = {});

DescentSet known_constraints_set(const Vector& u_k, const KnownGradientData& grad_data,
                                 const std::vector<int>& active_uncertain,
                                 const std::vector<int>& active_known,
                                 const ProjectionParams& params, const InputBox& box);

}  // namespace scfo
