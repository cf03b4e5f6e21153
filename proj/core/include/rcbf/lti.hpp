#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace rcbf::lti {

/// Continuous-time state-space system x' = Ax + Bu, y = Cx + Du.
///
/// Orders 0, 1 and 2 are supported. Order 0 is a static gain D and is
/// represented with empty A, B and C.
class StateSpace {
 public:
  static constexpr Eigen::Index kMaxOrder = 2;

  StateSpace(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c,
             Eigen::MatrixXd d);

  /// SISO first-order system (a, b, c, d).
  static StateSpace first_order(double a, double b, double c, double d);
  /// Static p x m gain with no states.
  static StateSpace static_gain(const Eigen::MatrixXd& d);
  static StateSpace static_gain(double d);

  const Eigen::MatrixXd& a() const noexcept { return a_; }
  const Eigen::MatrixXd& b() const noexcept { return b_; }
  const Eigen::MatrixXd& c() const noexcept { return c_; }
  const Eigen::MatrixXd& d() const noexcept { return d_; }

  Eigen::Index order() const noexcept { return a_.rows(); }
  Eigen::Index inputs() const noexcept { return d_.cols(); }
  Eigen::Index outputs() const noexcept { return d_.rows(); }
  bool is_siso() const noexcept { return inputs() == 1 && outputs() == 1; }

 private:
  Eigen::MatrixXd a_, b_, c_, d_;
};

/// Positive, strictly increasing angular frequencies in rad/s.
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::vector<double> omegas);

  /// `points` logarithmically spaced frequencies covering [lo, hi].
  static FrequencyGrid log_spaced(double lo, double hi, std::size_t points);

  const std::vector<double>& omegas() const noexcept { return omegas_; }
  std::size_t size() const noexcept { return omegas_.size(); }
  double operator[](std::size_t i) const { return omegas_[i]; }
  double front() const { return omegas_.front(); }
  double back() const { return omegas_.back(); }

 private:
  std::vector<double> omegas_;
};

/// Evaluates C (sI - A)^-1 B + D at an arbitrary complex s.
Eigen::MatrixXcd transfer_at(const StateSpace& ss, std::complex<double> s);

/// Frequency response C (jwI - A)^-1 B + D. Throws SingularResolvent when jw
/// is an eigenvalue of A.
Eigen::MatrixXcd freq_response(const StateSpace& ss, double omega);

/// SISO convenience wrapper around freq_response.
std::complex<double> freq_response_siso(const StateSpace& ss, double omega);

/// State space of G(s + c), i.e. (A - cI, B, C, D).
StateSpace shift(const StateSpace& ss, double c);

/// True when every eigenvalue of A has strictly negative real part.
/// An order-0 system is stable.
bool is_stable(const StateSpace& ss);

/// Eigenvalues of A (at most two), computed in closed form.
std::vector<std::complex<double>> eigenvalues(const StateSpace& ss);

struct FilterStep {
  Eigen::VectorXd next_state;
  Eigen::VectorXd output;  ///< C x + D u at the start of the step.
};

/// Exact zero-order-hold step of length dt with the input held at u_held.
FilterStep step_filter(const StateSpace& ss, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u_held, double dt);

/// ZOH transition pair: x+ = phi x + gamma u.
struct Discretization {
  Eigen::MatrixXd phi;
  Eigen::MatrixXd gamma;
};

/// Closed-form ZOH discretization for orders 0..2.
Discretization discretize_zoh(const StateSpace& ss, double dt);

}  // namespace rcbf::lti
