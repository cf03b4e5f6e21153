#include "rcbf/qcqp.hpp"

#include <cmath>
#include <limits>

#include "rcbf/error.hpp"

namespace rcbf::qcqp {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kMuCeiling = 18446744073709551616.0;  // 2^64

}  // namespace

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kUnconstrained:
      return "unconstrained";
    case SolveStatus::kActive:
      return "active";
    case SolveStatus::kInfeasibleBestEffort:
      return "infeasible";
  }
  return "unknown";
}

double active_tolerance(double rhs) { return 1e-10 * (1.0 + std::abs(rhs)); }

SolveReport project_halfspace(const Eigen::VectorXd& u0, const Eigen::VectorXd& lin,
                              double rhs) {
  if (u0.size() != lin.size()) throw InvalidArgument("project_halfspace: dimension mismatch");
  SolveReport r;
  const double value = lin.dot(u0);
  if (value >= rhs) {
    r.u = u0;
    r.constraint_slack = value - rhs;
    return r;
  }
  const double norm2 = lin.squaredNorm();
  if (norm2 == 0.0) {
    r.u = u0;
    r.status = SolveStatus::kInfeasibleBestEffort;
    r.constraint_slack = value - rhs;
    return r;
  }
  r.dual = (rhs - value) / norm2;
  r.u = u0 + r.dual * lin;
  r.status = SolveStatus::kActive;
  r.constraint_slack = lin.dot(r.u) - rhs;
  return r;
}

ConstraintPeak constraint_peak(const robust::QuadraticConstraint& qc,
                               const Eigen::VectorXd& u0) {
  ConstraintPeak peak;
  peak.u = u0;
  for (Eigen::Index i = 0; i < qc.dim(); ++i) {
    const double q = qc.quad(i);
    if (q > 0.0) {
      peak.u(i) = (qc.lin(i) - 2.0 * std::sqrt(q) * qc.shift(i)) / (2.0 * q);
    } else if (qc.lin(i) != 0.0) {
      peak.bounded = false;
    }
  }
  peak.value = peak.bounded ? qc.value(peak.u) : std::numeric_limits<double>::infinity();
  return peak;
}

SolveReport project_quadratic(const Eigen::VectorXd& u0, const robust::QuadraticConstraint& qc) {
  qc.validate();
  if (u0.size() != qc.dim()) throw InvalidArgument("project_quadratic: dimension mismatch");

  SolveReport r;
  const double slack0 = qc.slack(u0);
  if (slack0 >= 0.0) {
    r.u = u0;
    r.constraint_slack = slack0;
    return r;
  }

  const auto peak = constraint_peak(qc, u0);
  if (peak.bounded && peak.value < qc.rhs) {
    r.u = peak.u;
    r.status = SolveStatus::kInfeasibleBestEffort;
    r.constraint_slack = peak.value - qc.rhs;
    return r;
  }

  const Eigen::ArrayXd sq = qc.quad.array().sqrt();
  const Eigen::ArrayXd pull = qc.lin.array() - 2.0 * sq * qc.shift.array();
  const Eigen::ArrayXd rate = pull - 2.0 * qc.quad.array() * u0.array();
  const auto u_of = [&](double mu) -> Eigen::VectorXd {
    return (u0.array() + mu * pull) / (1.0 + 2.0 * mu * qc.quad.array());
  };
  // d/dmu g(u(mu)) = grad g(u) . du/dmu, du_i/dmu = rate_i / (1 + 2 mu q_i)^2.
  const auto dphi = [&](double mu, const Eigen::VectorXd& u) {
    const Eigen::ArrayXd den = 1.0 + 2.0 * mu * qc.quad.array();
    return qc.gradient(u).dot((rate / den.square()).matrix());
  };

  const double tol = active_tolerance(qc.rhs);
  double lo = 0.0;
  double hi = 1.0;
  while (qc.slack(u_of(hi)) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMuCeiling) {
      if (peak.bounded && std::abs(peak.value - qc.rhs) <= tol) {
        r.u = peak.u;
        r.status = SolveStatus::kActive;
        r.dual = kMuCeiling;
        r.constraint_slack = peak.value - qc.rhs;
        return r;
      }
      throw NumericalFailure("project_quadratic: failed to bracket the dual root");
    }
  }

  double mu = hi;
  Eigen::VectorXd u = u_of(mu);
  double f = qc.slack(u);
  for (int it = 1; it <= kMaxIterations; ++it) {
    r.iterations = it;
    if (std::abs(f) <= tol) {
      r.u = std::move(u);
      r.status = SolveStatus::kActive;
      r.dual = mu;
      r.constraint_slack = f;
      return r;
    }
    if (f < 0.0) {
      lo = mu;
    } else {
      hi = mu;
    }
    const double slope = dphi(mu, u);
    double next = slope > 0.0 ? mu - f / slope : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == mu) break;
    mu = next;
    u = u_of(mu);
    f = qc.slack(u);
  }
  if (std::abs(f) <= tol) {
    r.u = std::move(u);
    r.status = SolveStatus::kActive;
    r.dual = mu;
    r.constraint_slack = f;
    return r;
  }
  throw NumericalFailure("project_quadratic: dual root did not converge");
}

}  // namespace rcbf::qcqp
