#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rcbf/lti.hpp"

namespace rcbf::uncertainty {

enum class FamilyKind {
  kDelayRange,          ///< Delta(s) = e^{-s tau} - 1, tau in [lo, hi] seconds.
  kActuatorPoleRange,   ///< Delta(s) = -s / (s + p), p in [lo, hi] rad/s.
};

struct PerturbationFamily {
  FamilyKind kind = FamilyKind::kDelayRange;
  double param_lo = 0.0;
  double param_hi = 0.0;
  std::size_t n_samples = 20;

  /// Throws InvalidArgument unless 0 <= lo < hi and n_samples >= 2.
  void validate() const;

  /// Members sampled evenly over [lo, hi], both ends included.
  std::vector<double> samples() const;

  /// Delay family [fraction * tau_max, tau_max].
  static PerturbationFamily delay_up_to(double tau_max, double lo_fraction = 0.01,
                                        std::size_t n_samples = 20);
};

/// alpha-IQC defined by a SISO stable filter F(s), exponent alpha and
/// multiplier lambda.
struct IqcSpec {
  lti::StateSpace filter;
  double alpha = 0.0;
  double lambda = 1.0;

  /// Throws InvalidArgument if the filter is not SISO and stable, alpha < 0,
  /// or lambda <= 0.
  void validate() const;
};

/// |e^{(alpha/2) tau} e^{-j w tau} - 1|: the delay perturbation evaluated at
/// s = jw - alpha/2.
double shifted_delay_magnitude(double tau, double alpha, double omega);

/// |-(jw - alpha/2) / (jw - alpha/2 + pole)|. Throws ShiftedInstability when
/// pole <= alpha/2.
double shifted_actuator_magnitude(double pole, double alpha, double omega);

/// Magnitude of one family member at the shifted frequency.
double shifted_magnitude(FamilyKind kind, double param, double alpha, double omega);

/// Pointwise maximum of the shifted magnitudes over the sampled family.
std::vector<double> family_envelope(const PerturbationFamily& family, double alpha,
                                    const lti::FrequencyGrid& grid);

/// F~(s) = (b1 s + b0) / (s + a0).
struct FirstOrderBound {
  double a0 = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;

  double dc_gain() const { return b0 / a0; }
  double magnitude(double omega) const;
  /// Realization (A, B, C, D) = (-a0, 1, b0 - b1 a0, b1).
  lti::StateSpace state_space() const;
};

struct FitOptions {
  double margin = 0.02;
  /// Candidate poles a0 are log-spaced over
  /// [omega_min * search_lo_factor, omega_max * search_hi_factor].
  double search_lo_factor = 1e-2;
  double search_hi_factor = 1e2;
  std::size_t search_points = 2001;
};

/// Fits a stable, minimum-phase first-order bound with
/// |F~(jw)| >= (1 + margin) envelope(w) on every grid frequency.
///
/// The high-frequency gain is b1 = (1 + 2 margin) sup(envelope) and the DC
/// gain is g0 = (1 + margin) envelope(omega_min). The bound's magnitude is
/// monotone decreasing in a0 for fixed b1 > g0, so the largest admissible a0
/// on the search grid gives the tightest mid-band bound.
///
/// Throws FitFailure (carrying the worst violating frequency) when no
/// candidate a0 is admissible.
FirstOrderBound fit_first_order_bound(std::span<const double> envelope,
                                      const lti::FrequencyGrid& grid,
                                      const FitOptions& options = {});

/// Smallest |F(jw)| - envelope(w) over the grid.
double bound_slack(const lti::StateSpace& bound, std::span<const double> envelope,
                   const lti::FrequencyGrid& grid);

/// IqcSpec whose filter is F(s) = F~(s + alpha/2).
IqcSpec build_iqc(const lti::StateSpace& fitted, double alpha, double lambda);

/// Simulates z = F u from zero state and returns the minimum over T of the
/// trapezoidal running integral of e^{alpha t} (z^2 - w^2). The empty
/// integral (T = 0) counts, so the result is never positive.
double check_iqc_numeric(const IqcSpec& iqc, std::span<const double> u,
                         std::span<const double> w, double dt);

/// w = D_tau(u) - u with tau rounded to the nearest multiple of dt and a
/// zero prefix.
std::vector<double> delay_perturbation(std::span<const double> u, double tau, double dt);

/// sum u_k^2 dt.
double signal_energy(std::span<const double> u, double dt);

}  // namespace rcbf::uncertainty
