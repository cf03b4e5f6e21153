#include "rcbf/lti.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rcbf/error.hpp"

namespace rcbf::lti {

namespace {

using cd = std::complex<double>;

constexpr double kSingularTol = 1e-13;

// (e^z - 1) / z, accurate near z = 0.
cd phi1(cd z) {
  if (std::abs(z) < 1e-3) {
    // 1 + z/2 + z^2/6 + z^3/24 + z^4/120
    return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)));
  }
  return (std::exp(z) - 1.0) / z;
}

// d/dz phi1(z), accurate near z = 0.
cd phi1_prime(cd z) {
  if (std::abs(z) < 1e-2) {
    // 1/2 + z/3 + z^2/8 + z^3/30 + z^4/144 + z^5/840
    return 0.5 + z * (1.0 / 3.0 + z * (1.0 / 8.0 + z * (1.0 / 30.0 + z * (1.0 / 144.0 + z / 840.0))));
  }
  const cd ez = std::exp(z);
  return (z * ez - (ez - 1.0)) / (z * z);
}

// Coefficients (c0, c1) with f(A) = c0 I + c1 A for a 2x2 A with
// eigenvalues l1, l2 (Cayley-Hamilton / Lagrange-Sylvester).
template <typename F, typename FPrime>
std::pair<cd, cd> sylvester_coeffs(cd l1, cd l2, double dt, F f, FPrime fprime) {
  const cd gap = l1 - l2;
  if (std::abs(gap) * dt < 1e-6) {
    const cd m = 0.5 * (l1 + l2);
    const cd c1 = fprime(m);
    return {f(m) - m * c1, c1};
  }
  const cd c1 = (f(l1) - f(l2)) / gap;
  return {f(l1) - c1 * l1, c1};
}

void check_dims(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                const Eigen::MatrixXd& c, const Eigen::MatrixXd& d) {
  if (a.rows() != a.cols()) {
    throw InvalidArgument("StateSpace: A must be square");
  }
  const auto n = a.rows();
  if (n > StateSpace::kMaxOrder) {
    throw UnsupportedOrder("StateSpace: order " + std::to_string(n) +
                           " exceeds the supported maximum of 2");
  }
  if (b.rows() != n) throw InvalidArgument("StateSpace: B must have n rows");
  if (c.cols() != n) throw InvalidArgument("StateSpace: C must have n columns");
  if (n > 0 && (b.cols() != d.cols() || c.rows() != d.rows())) {
    throw InvalidArgument("StateSpace: D must be p x m");
  }
  if (d.size() == 0) throw InvalidArgument("StateSpace: D must be non-empty");
  if (!a.allFinite() || !b.allFinite() || !c.allFinite() || !d.allFinite()) {
    throw InvalidArgument("StateSpace: non-finite entry");
  }
}

}  // namespace

StateSpace::StateSpace(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c,
                       Eigen::MatrixXd d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
  check_dims(a_, b_, c_, d_);
  if (a_.rows() == 0) {
    b_.resize(0, d_.cols());
    c_.resize(d_.rows(), 0);
  }
}

StateSpace StateSpace::first_order(double a, double b, double c, double d) {
  return StateSpace(Eigen::MatrixXd::Constant(1, 1, a),
                    Eigen::MatrixXd::Constant(1, 1, b),
                    Eigen::MatrixXd::Constant(1, 1, c),
                    Eigen::MatrixXd::Constant(1, 1, d));
}

StateSpace StateSpace::static_gain(const Eigen::MatrixXd& d) {
  return StateSpace(Eigen::MatrixXd(0, 0), Eigen::MatrixXd(0, d.cols()),
                    Eigen::MatrixXd(d.rows(), 0), d);
}

StateSpace StateSpace::static_gain(double d) {
  return static_gain(Eigen::MatrixXd::Constant(1, 1, d));
}

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
  if (omegas_.empty()) throw InvalidArgument("FrequencyGrid: empty");
  for (std::size_t i = 0; i < omegas_.size(); ++i) {
    if (!(omegas_[i] > 0.0) || !std::isfinite(omegas_[i])) {
      throw InvalidArgument("FrequencyGrid: frequencies must be positive and finite");
    }
    if (i > 0 && !(omegas_[i] > omegas_[i - 1])) {
      throw InvalidArgument("FrequencyGrid: frequencies must be strictly increasing");
    }
  }
}

FrequencyGrid FrequencyGrid::log_spaced(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) {
    throw InvalidArgument("FrequencyGrid::log_spaced: need 0 < lo < hi and points >= 2");
  }
  std::vector<double> w(points);
  const double l0 = std::log10(lo);
  const double l1 = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(points - 1);
    w[i] = std::pow(10.0, l0 + frac * (l1 - l0));
  }
  w.front() = lo;
  w.back() = hi;
  return FrequencyGrid(std::move(w));
}

Eigen::MatrixXcd transfer_at(const StateSpace& ss, std::complex<double> s) {
  const Eigen::MatrixXcd d = ss.d().cast<cd>();
  const auto n = ss.order();
  if (n == 0) return d;

  const Eigen::MatrixXcd a = ss.a().cast<cd>();
  const double scale = std::max(1.0, ss.a().cwiseAbs().maxCoeff());
  Eigen::MatrixXcd resolvent_inv(n, n);
  if (n == 1) {
    const cd den = s - a(0, 0);
    if (std::abs(den) <= kSingularTol * scale) {
      throw SingularResolvent("freq_response: s coincides with a pole");
    }
    resolvent_inv(0, 0) = 1.0 / den;
  } else {
    const cd m00 = s - a(0, 0);
    const cd m11 = s - a(1, 1);
    const cd m01 = -a(0, 1);
    const cd m10 = -a(1, 0);
    const cd det = m00 * m11 - m01 * m10;
    if (std::abs(det) <= kSingularTol * scale * scale) {
      throw SingularResolvent("freq_response: s coincides with a pole");
    }
    resolvent_inv << m11 / det, -m01 / det, -m10 / det, m00 / det;
  }
  return ss.c().cast<cd>() * resolvent_inv * ss.b().cast<cd>() + d;
}

Eigen::MatrixXcd freq_response(const StateSpace& ss, double omega) {
  return transfer_at(ss, cd(0.0, omega));
}

std::complex<double> freq_response_siso(const StateSpace& ss, double omega) {
  if (!ss.is_siso()) throw InvalidArgument("freq_response_siso: system is not SISO");
  return freq_response(ss, omega)(0, 0);
}

StateSpace shift(const StateSpace& ss, double c) {
  if (ss.order() == 0) return ss;
  Eigen::MatrixXd a = ss.a();
  a.diagonal().array() -= c;
  return StateSpace(std::move(a), ss.b(), ss.c(), ss.d());
}

std::vector<std::complex<double>> eigenvalues(const StateSpace& ss) {
  const auto& a = ss.a();
  switch (ss.order()) {
    case 0:
      return {};
    case 1:
      return {cd(a(0, 0), 0.0)};
    default: {
      const double half_trace = 0.5 * (a(0, 0) + a(1, 1));
      const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
      const double disc = half_trace * half_trace - det;
      if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        // Avoid cancellation in the smaller-magnitude root.
        const double big = half_trace >= 0.0 ? half_trace + r : half_trace - r;
        const double small = big != 0.0 ? det / big : 0.0;
        return {cd(big, 0.0), cd(small, 0.0)};
      }
      const double im = std::sqrt(-disc);
      return {cd(half_trace, im), cd(half_trace, -im)};
    }
  }
}

bool is_stable(const StateSpace& ss) {
  const auto& a = ss.a();
  switch (ss.order()) {
    case 0:
      return true;
    case 1:
      return a(0, 0) < 0.0;
    case 2: {
      const double trace = a(0, 0) + a(1, 1);
      const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
      return trace < 0.0 && det > 0.0;
    }
    default:
      throw UnsupportedOrder("is_stable: order > 2");
  }
}

Discretization discretize_zoh(const StateSpace& ss, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("discretize_zoh: dt must be positive");
  const auto n = ss.order();
  Discretization out;
  if (n == 0) {
    out.phi.resize(0, 0);
    out.gamma.resize(0, ss.inputs());
    return out;
  }
  if (n == 1) {
    const double a = ss.a()(0, 0);
    const double ad = a * dt;
    out.phi = Eigen::MatrixXd::Constant(1, 1, std::exp(ad));
    const double integral = std::abs(ad) < 1e-300 ? dt : std::expm1(ad) / a;
    out.gamma = integral * ss.b();
    return out;
  }

  const auto eig = eigenvalues(ss);
  const auto exp_f = [dt](cd l) { return std::exp(l * dt); };
  const auto exp_fp = [dt](cd l) { return dt * std::exp(l * dt); };
  // int_0^dt e^{l s} ds = dt * phi1(l dt)
  const auto int_f = [dt](cd l) { return dt * phi1(l * dt); };
  const auto int_fp = [dt](cd l) { return dt * dt * phi1_prime(l * dt); };

  const auto [p0, p1] = sylvester_coeffs(eig[0], eig[1], dt, exp_f, exp_fp);
  const auto [g0, g1] = sylvester_coeffs(eig[0], eig[1], dt, int_f, int_fp);

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  out.phi = p0.real() * eye + p1.real() * ss.a();
  const Eigen::MatrixXd integral = g0.real() * eye + g1.real() * ss.a();
  out.gamma = integral * ss.b();
  return out;
}

FilterStep step_filter(const StateSpace& ss, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u_held, double dt) {
  if (x.size() != ss.order()) throw InvalidArgument("step_filter: state dimension mismatch");
  if (u_held.size() != ss.inputs()) throw InvalidArgument("step_filter: input dimension mismatch");
  FilterStep out;
  out.output = ss.d() * u_held;
  if (ss.order() > 0) out.output += ss.c() * x;
  const auto disc = discretize_zoh(ss, dt);
  if (ss.order() > 0) {
    out.next_state = disc.phi * x + disc.gamma * u_held;
  } else {
    out.next_state = Eigen::VectorXd(0);
  }
  return out;
}

}  // namespace rcbf::lti
