#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rcbf/barrier.hpp"
#include "rcbf/uncertainty.hpp"

namespace rcbf::robust {

/// One SISO alpha-IQC covering input channel `channel_index`, together with
/// the current state of its filter.
struct RobustChannel {
  uncertainty::IqcSpec iqc;
  Eigen::VectorXd x_f;
  Eigen::Index channel_index = 0;

  /// Channel with zero filter state.
  static RobustChannel at_rest(uncertainty::IqcSpec iqc, Eigen::Index channel_index);

  /// C_F x_F, the part of the filter output not driven by the current input.
  double free_output() const;
  double feedthrough() const { return iqc.filter.d()(0, 0); }
};

/// {u : g(u) >= rhs} with
///   g(u) = lin . u - sum_i (sqrt(q_i) u_i + s_i)^2 + offset,   q_i >= 0.
/// g is concave, so the feasible set is convex.
struct QuadraticConstraint {
  Eigen::VectorXd quad;
  Eigen::VectorXd lin;
  Eigen::VectorXd shift;
  double offset = 0.0;
  double rhs = 0.0;

  Eigen::Index dim() const { return lin.size(); }
  double value(const Eigen::VectorXd& u) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const;
  double slack(const Eigen::VectorXd& u) const { return value(u) - rhs; }

  /// Throws InvalidArgument on dimension mismatch or negative curvature.
  void validate() const;

  /// Zero-curvature embedding of a halfspace.
  static QuadraticConstraint from_affine(const barrier::AffineConstraint& c);
};

/// I(x_F, u, w) = (C_F x_F + D_F u)^2 - w^2 for one channel.
double iqc_integrand(const RobustChannel& channel, double u_i, double w_i);

/// w*_i = -b_i / (2 lambda_i), the minimizer of b . w + sum lambda_i w_i^2.
Eigen::VectorXd worst_case_w(const Eigen::VectorXd& input_gain,
                             std::span<const double> lambdas);

/// Exponential-CBF condition with the IQC term and w eliminated:
///   drift + b.u - sum_i [b_i^2/(4 lambda_i) + lambda_i (C_F x_F,i + D_F,i u_i)^2]
///       >= -alpha^2 h - 2 alpha hdot.
QuadraticConstraint robust_ecbf_constraint(const barrier::BarrierSpec& spec,
                                           const barrier::BarrierEval& eval,
                                           std::span<const RobustChannel> channels);

/// Relative-degree-one robust condition
///   Lf_h + Lg_h.(u + w*) - sum_i lambda_i I_i(x_F, u, w*) >= -alpha h.
QuadraticConstraint robust_cbf_constraint_rd1(double lf_h, const Eigen::VectorXd& lg_h,
                                              double h, double alpha,
                                              std::span<const RobustChannel> channels);

}  // namespace rcbf::robust
