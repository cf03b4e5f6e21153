#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "rcbf/robust.hpp"

namespace rcbf::qcqp {

enum class SolveStatus {
  kUnconstrained,         ///< Nominal input already satisfies the constraint.
  kActive,                ///< Constraint holds with equality at the solution.
  kInfeasibleBestEffort,  ///< No input satisfies it; u maximizes the constraint.
};

std::string_view to_string(SolveStatus status);

struct SolveReport {
  Eigen::VectorXd u;
  SolveStatus status = SolveStatus::kUnconstrained;
  double dual = 0.0;
  double constraint_slack = 0.0;
  int iterations = 0;
};

/// Relative tolerance used for |g(u) - rhs| at an active solution.
double active_tolerance(double rhs);

/// argmin 1/2 |u - u0|^2 s.t. lin . u >= rhs, in closed form.
SolveReport project_halfspace(const Eigen::VectorXd& u0, const Eigen::VectorXd& lin, double rhs);

/// Unconstrained maximizer of g. `bounded` is false when g grows without
/// bound (some channel has zero curvature and nonzero slope).
struct ConstraintPeak {
  Eigen::VectorXd u;
  double value = 0.0;
  bool bounded = true;
};

ConstraintPeak constraint_peak(const robust::QuadraticConstraint& qc,
                               const Eigen::VectorXd& u0);

/// argmin 1/2 |u - u0|^2 s.t. g(u) >= rhs for the concave quadratic g.
///
/// Solves the scalar dual equation g(u(mu)) = rhs with u(mu) from
/// stationarity, (1 + 2 mu q_i) u_i = u0_i + mu (lin_i - 2 sqrt(q_i) s_i),
/// using a doubling bracket followed by safeguarded Newton iteration.
/// Throws NumericalFailure if that does not converge in 200 iterations.
SolveReport project_quadratic(const Eigen::VectorXd& u0, const robust::QuadraticConstraint& qc);

}  // namespace rcbf::qcqp
