#pragma once

#include <Eigen/Dense>

namespace rcbf::barrier {

/// Circular obstacle: h(p) = |p - center|^2 - radius^2, safe set h >= 0.
struct BarrierSpec {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 1.0;
  double alpha = 1.0;  ///< Barrier decay rate (1/s).

  void validate() const;
};

/// h and its time derivatives along the double integrator, with
/// hddot(u) = hddot_drift + hddot_input_gain . u.
struct BarrierEval {
  double h = 0.0;
  double hdot = 0.0;
  double hddot_drift = 0.0;
  Eigen::Vector2d hddot_input_gain = Eigen::Vector2d::Zero();

  /// h~ = hdot + alpha h.
  double htilde(double alpha) const { return hdot + alpha * h; }
};

BarrierEval eval_barrier(const BarrierSpec& spec, const Eigen::Vector2d& p,
                         const Eigen::Vector2d& v);

/// Halfspace {u : lin . u >= rhs}.
struct AffineConstraint {
  Eigen::VectorXd lin;
  double rhs = 0.0;

  bool satisfied_by(const Eigen::VectorXd& u) const { return lin.dot(u) >= rhs; }
  /// lin = 0 with rhs > 0: no input can satisfy the constraint.
  bool degenerate_infeasible() const { return lin.isZero(0.0) && rhs > 0.0; }
};

/// Exponential-CBF condition hddot >= -alpha^2 h - 2 alpha hdot, written as
/// gain . u >= -alpha^2 h - 2 alpha hdot - drift.
AffineConstraint ecbf_constraint(const BarrierSpec& spec, const BarrierEval& eval);

/// Relative-degree-one condition Lf_h + Lg_h . u >= -alpha h.
AffineConstraint cbf_constraint_rd1(double lf_h, const Eigen::VectorXd& lg_h, double h,
                                    double alpha);

}  // namespace rcbf::barrier
