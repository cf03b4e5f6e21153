#include "rcbf/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "rcbf/error.hpp"

namespace rcbf::uncertainty {

void PerturbationFamily::validate() const {
  if (!std::isfinite(param_lo) || !std::isfinite(param_hi) || param_lo < 0.0 ||
      !(param_lo < param_hi)) {
    throw InvalidArgument("PerturbationFamily: need 0 <= param_lo < param_hi");
  }
  if (n_samples < 2) throw InvalidArgument("PerturbationFamily: n_samples must be >= 2");
}

std::vector<double> PerturbationFamily::samples() const {
  validate();
  std::vector<double> out(n_samples);
  const double step = (param_hi - param_lo) / static_cast<double>(n_samples - 1);
  for (std::size_t i = 0; i < n_samples; ++i) out[i] = param_lo + step * static_cast<double>(i);
  out.back() = param_hi;
  return out;
}

PerturbationFamily PerturbationFamily::delay_up_to(double tau_max, double lo_fraction,
                                                   std::size_t n_samples) {
  PerturbationFamily f{FamilyKind::kDelayRange, lo_fraction * tau_max, tau_max, n_samples};
  f.validate();
  return f;
}

void IqcSpec::validate() const {
  if (!filter.is_siso()) throw InvalidArgument("IqcSpec: filter must be SISO");
  if (!lti::is_stable(filter)) throw InvalidArgument("IqcSpec: filter must be stable");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidArgument("IqcSpec: alpha must be >= 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("IqcSpec: lambda must be > 0");
}

double shifted_delay_magnitude(double tau, double alpha, double omega) {
  if (tau < 0.0) throw InvalidArgument("shifted_delay_magnitude: tau must be >= 0");
  if (alpha < 0.0) throw InvalidArgument("shifted_delay_magnitude: alpha must be >= 0");
  const std::complex<double> v = std::exp(0.5 * alpha * tau) * std::polar(1.0, -omega * tau);
  return std::abs(v - 1.0);
}

double shifted_actuator_magnitude(double pole, double alpha, double omega) {
  if (!(pole > 0.5 * alpha)) {
    throw ShiftedInstability("shifted_actuator_magnitude: pole must exceed alpha/2");
  }
  const std::complex<double> s(-0.5 * alpha, omega);
  return std::abs(-s / (s + pole));
}

double shifted_magnitude(FamilyKind kind, double param, double alpha, double omega) {
  switch (kind) {
    case FamilyKind::kDelayRange:
      return shifted_delay_magnitude(param, alpha, omega);
    case FamilyKind::kActuatorPoleRange:
      return shifted_actuator_magnitude(param, alpha, omega);
  }
  throw InvalidArgument("shifted_magnitude: unknown family kind");
}

std::vector<double> family_envelope(const PerturbationFamily& family, double alpha,
                                    const lti::FrequencyGrid& grid) {
  const auto params = family.samples();
  std::vector<double> env(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double m = 0.0;
    for (double p : params) m = std::max(m, shifted_magnitude(family.kind, p, alpha, grid[i]));
    env[i] = m;
  }
  return env;
}

double FirstOrderBound::magnitude(double omega) const {
  const double w2 = omega * omega;
  return std::sqrt((b1 * b1 * w2 + b0 * b0) / (w2 + a0 * a0));
}

lti::StateSpace FirstOrderBound::state_space() const {
  return lti::StateSpace::first_order(-a0, 1.0, b0 - b1 * a0, b1);
}

FirstOrderBound fit_first_order_bound(std::span<const double> envelope,
                                      const lti::FrequencyGrid& grid,
                                      const FitOptions& options) {
  if (envelope.size() != grid.size()) {
    throw InvalidArgument("fit_first_order_bound: envelope and grid sizes differ");
  }
  if (!(options.margin >= 0.0)) throw InvalidArgument("fit_first_order_bound: margin must be >= 0");
  if (options.search_points < 2) throw InvalidArgument("fit_first_order_bound: search_points < 2");
  double sup = 0.0;
  for (double e : envelope) {
    if (!std::isfinite(e) || e < 0.0) {
      throw InvalidArgument("fit_first_order_bound: envelope must be finite and nonnegative");
    }
    sup = std::max(sup, e);
  }
  if (!(sup > 0.0)) throw InvalidArgument("fit_first_order_bound: envelope is identically zero");

  const double target_scale = 1.0 + options.margin;
  const double b1 = (1.0 + 2.0 * options.margin) * sup;
  // A zero DC envelope still needs b0 > 0 for minimum phase.
  const double g0 = std::max(target_scale * envelope.front(), 1e-6 * sup);

  const auto worst_violation = [&](const FirstOrderBound& f, double& worst_omega) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double slack = f.magnitude(grid[i]) - target_scale * envelope[i];
      if (slack < worst) {
        worst = slack;
        worst_omega = grid[i];
      }
    }
    return worst;
  };

  const auto candidates = lti::FrequencyGrid::log_spaced(
      grid.front() * options.search_lo_factor, grid.back() * options.search_hi_factor,
      options.search_points);
  double worst_omega = grid.front();
  for (std::size_t k = candidates.size(); k-- > 0;) {
    const double a0 = candidates[k];
    const FirstOrderBound f{a0, g0 * a0, b1};
    double w = 0.0;
    if (worst_violation(f, w) >= 0.0) return f;
    if (k == 0) worst_omega = w;
  }
  std::ostringstream msg;
  msg << "fit_first_order_bound: no admissible pole on the search grid; worst violation at omega="
      << worst_omega;
  throw FitFailure(msg.str(), worst_omega);
}

double bound_slack(const lti::StateSpace& bound, std::span<const double> envelope,
                   const lti::FrequencyGrid& grid) {
  if (envelope.size() != grid.size()) throw InvalidArgument("bound_slack: size mismatch");
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    worst = std::min(worst, std::abs(lti::freq_response_siso(bound, grid[i])) - envelope[i]);
  }
  return worst;
}

IqcSpec build_iqc(const lti::StateSpace& fitted, double alpha, double lambda) {
  if (!lti::is_stable(fitted)) throw InvalidArgument("build_iqc: fitted bound must be stable");
  IqcSpec spec{lti::shift(fitted, 0.5 * alpha), alpha, lambda};
  if (!lti::is_stable(spec.filter)) {
    throw ShiftedInstability("build_iqc: shifted filter is unstable");
  }
  spec.validate();
  return spec;
}

double check_iqc_numeric(const IqcSpec& iqc, std::span<const double> u,
                         std::span<const double> w, double dt) {
  if (u.size() != w.size()) throw InvalidArgument("check_iqc_numeric: u and w lengths differ");
  if (!(dt > 0.0)) throw InvalidArgument("check_iqc_numeric: dt must be positive");
  iqc.validate();
  const auto& f = iqc.filter;
  const auto disc = lti::discretize_zoh(f, dt);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(f.order());
  const double d = f.d()(0, 0);

  double running = 0.0;
  double worst = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    double z = d * u[k];
    if (f.order() > 0) z += (f.c() * x)(0);
    const double integrand = std::exp(iqc.alpha * dt * static_cast<double>(k)) * (z * z - w[k] * w[k]);
    if (k > 0) {
      running += 0.5 * dt * (prev + integrand);
      worst = std::min(worst, running);
    }
    prev = integrand;
    if (f.order() > 0) x = disc.phi * x + disc.gamma.col(0) * u[k];
  }
  return worst;
}

std::vector<double> delay_perturbation(std::span<const double> u, double tau, double dt) {
  if (tau < 0.0 || !(dt > 0.0)) throw InvalidArgument("delay_perturbation: need tau >= 0, dt > 0");
  const auto steps = static_cast<std::size_t>(std::llround(tau / dt));
  std::vector<double> w(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double delayed = k >= steps ? u[k - steps] : 0.0;
    w[k] = delayed - u[k];
  }
  return w;
}

double signal_energy(std::span<const double> u, double dt) {
  double e = 0.0;
  for (double v : u) e += v * v;
  return e * dt;
}

}  // namespace rcbf::uncertainty
