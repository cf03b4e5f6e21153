#pragma once

// Independent reference computations used only by tests. None of these call
// into the code paths they are used to check.

#include <cmath>
#include <complex>
#include <limits>
#include <optional>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "rcbf/robust.hpp"

namespace rcbf::oracle {

/// ZOH discretization from the block matrix exponential
/// exp([[A, B], [0, 0]] dt) = [[Phi, Gamma], [0, I]] (Van Loan).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> zoh_van_loan(const Eigen::MatrixXd& a,
                                                                 const Eigen::MatrixXd& b,
                                                                 double dt) {
  const auto n = a.rows();
  const auto m = b.cols();
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n + m, n + m);
  block.topLeftCorner(n, n) = a * dt;
  block.topRightCorner(n, m) = b * dt;
  const Eigen::MatrixXd e = block.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

/// Direct evaluation of C ((jw + c) I - A)^-1 B + D by LU solve.
inline std::complex<double> shifted_response(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                             const Eigen::MatrixXd& c, double d, double omega,
                                             double shift) {
  const auto n = a.rows();
  if (n == 0) return d;
  const std::complex<double> s(shift, omega);
  const Eigen::MatrixXcd m = s * Eigen::MatrixXcd::Identity(n, n) - a.cast<std::complex<double>>();
  const Eigen::VectorXcd x = m.partialPivLu().solve(b.cast<std::complex<double>>().col(0));
  return (c.cast<std::complex<double>>() * x)(0) + d;
}

/// max real part of the eigenvalues via Eigen's general eigensolver.
inline double max_real_eigenvalue(const Eigen::Matrix2d& a) {
  Eigen::EigenSolver<Eigen::Matrix2d> es(a);
  return es.eigenvalues().real().maxCoeff();
}

/// min over a uniform w grid of b w + lambda w^2.
inline double grid_min_over_w(double b, double lambda, double halfwidth, int points) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double w = -halfwidth + 2.0 * halfwidth * i / (points - 1);
    best = std::min(best, b * w + lambda * w * w);
  }
  return best;
}

/// Exhaustive search for the feasible grid point closest to u0 on a grid of
/// n_per_axis points per axis spanning u0 +/- halfwidth (1 or 2 channels).
struct GridOracleResult {
  std::optional<Eigen::VectorXd> u;
  double resolution = 0.0;
};

inline GridOracleResult grid_oracle(const Eigen::VectorXd& u0, const robust::QuadraticConstraint& qc,
                                    double halfwidth, int n_per_axis) {
  GridOracleResult out;
  out.resolution = 2.0 * halfwidth / (n_per_axis - 1);
  const auto g = [&](const Eigen::VectorXd& u) {
    double v = qc.offset;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double r = std::sqrt(qc.quad(i)) * u(i) + qc.shift(i);
      v += qc.lin(i) * u(i) - r * r;
    }
    return v;
  };
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd u(u0.size());
  if (u0.size() == 1) {
    for (int i = 0; i < n_per_axis; ++i) {
      u(0) = u0(0) - halfwidth + out.resolution * i;
      if (g(u) >= qc.rhs && (u - u0).norm() < best) {
        best = (u - u0).norm();
        out.u = u;
      }
    }
  } else {
    for (int i = 0; i < n_per_axis; ++i) {
      u(0) = u0(0) - halfwidth + out.resolution * i;
      for (int j = 0; j < n_per_axis; ++j) {
        u(1) = u0(1) - halfwidth + out.resolution * j;
        const double dist = (u - u0).norm();
        if (dist < best && g(u) >= qc.rhs) {
          best = dist;
          out.u = u;
        }
      }
    }
  }
  return out;
}

}  // namespace rcbf::oracle
