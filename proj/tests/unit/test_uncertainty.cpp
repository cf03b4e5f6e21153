#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rcbf/error.hpp"
#include "rcbf/uncertainty.hpp"

using namespace rcbf;
using namespace rcbf::uncertainty;
using lti::FrequencyGrid;
using lti::StateSpace;

namespace {

const double kAnchorDc = std::exp(0.325) - 1.0;  // 0.38402...
const double kAnchorHf = std::exp(0.325) + 1.0;  // 2.38402...

std::vector<double> piecewise(std::mt19937_64& rng, std::size_t n, std::size_t dwell) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::vector<double> u(n);
  double level = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k % dwell == 0) level = amp(rng);
    u[k] = level;
  }
  return u;
}

PerturbationFamily ten_delays() { return {FamilyKind::kDelayRange, 0.013, 0.13, 10}; }

}  // namespace

TEST(Family, Validation) {
  EXPECT_NO_THROW(ten_delays().validate());
  EXPECT_THROW((PerturbationFamily{FamilyKind::kDelayRange, 0.13, 0.13, 10}).validate(),
               InvalidArgument);
  EXPECT_THROW((PerturbationFamily{FamilyKind::kDelayRange, -0.1, 0.13, 10}).validate(),
               InvalidArgument);
  EXPECT_THROW((PerturbationFamily{FamilyKind::kDelayRange, 0.0, 0.13, 1}).validate(),
               InvalidArgument);
  const auto s = ten_delays().samples();
  ASSERT_EQ(s.size(), 10u);
  EXPECT_DOUBLE_EQ(s.front(), 0.013);
  EXPECT_DOUBLE_EQ(s.back(), 0.13);
  EXPECT_NEAR(s[1] - s[0], 0.013, 1e-15);
  const auto def = PerturbationFamily::delay_up_to(0.13);
  EXPECT_DOUBLE_EQ(def.param_lo, 0.0013);
  EXPECT_EQ(def.n_samples, 20u);
}

TEST(IqcSpec, Validation) {
  const auto f = StateSpace::first_order(-16.98, 6.2, -5.7, 2.84);
  EXPECT_NO_THROW((IqcSpec{f, 5.0, 0.1}).validate());
  EXPECT_THROW((IqcSpec{f, 5.0, 0.0}).validate(), InvalidArgument);
  EXPECT_THROW((IqcSpec{f, -1.0, 0.1}).validate(), InvalidArgument);
  EXPECT_THROW((IqcSpec{StateSpace::first_order(1, 1, 1, 1), 5.0, 0.1}).validate(),
               InvalidArgument);
}

TEST(ShiftedDelay, Examples) {
  EXPECT_EQ(shifted_delay_magnitude(0.0, 5.0, 3.0), 0.0);
  EXPECT_NEAR(shifted_delay_magnitude(0.13, 5.0, 0.0), 0.38402, 2e-5);
  EXPECT_NEAR(shifted_delay_magnitude(0.13, 5.0, 0.0), kAnchorDc, 1e-14);
  EXPECT_NEAR(shifted_delay_magnitude(0.13, 5.0, std::numbers::pi / 0.13), 2.38402, 2e-5);
  EXPECT_NEAR(shifted_delay_magnitude(0.13, 5.0, std::numbers::pi / 0.13), kAnchorHf, 1e-13);
}

TEST(ShiftedDelay, UnshiftedIsTwoSinHalf) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> tau(0.0, 0.5), lw(-2.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = tau(rng), w = std::pow(10.0, lw(rng));
    EXPECT_NEAR(shifted_delay_magnitude(t, 0.0, w), 2.0 * std::abs(std::sin(w * t / 2.0)), 1e-12);
  }
}

TEST(ShiftedActuator, Examples) {
  EXPECT_NEAR(shifted_actuator_magnitude(10.0, 5.0, 1e9), 1.0, 1e-8);
  EXPECT_NEAR(shifted_actuator_magnitude(10.0, 0.0, 10.0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(shifted_actuator_magnitude(10.0, 5.0, 0.0), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(shifted_actuator_magnitude(2.5, 5.0, 1.0), ShiftedInstability);
  EXPECT_THROW(shifted_actuator_magnitude(1.0, 5.0, 1.0), ShiftedInstability);
}

TEST(Envelope, DominatesMembersAndDcValue) {
  const auto grid = FrequencyGrid::log_spaced(1e-2, 1e4, 400);
  const auto env = family_envelope(ten_delays(), 5.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_GE(env[i], shifted_delay_magnitude(0.13, 5.0, grid[i]));
    EXPECT_GE(env[i], shifted_delay_magnitude(0.013, 5.0, grid[i]));
  }
  const auto dc = family_envelope({FamilyKind::kDelayRange, 0.013, 0.13, 10}, 5.0,
                                  FrequencyGrid({1e-6}));
  EXPECT_NEAR(dc[0], 0.38402, 2e-5);
  EXPECT_NEAR(dc[0], kAnchorDc, 1e-9);
}

TEST(Envelope, CollapsedRangeIsSingleMember) {
  const auto grid = FrequencyGrid::log_spaced(1e-2, 1e4, 200);
  const auto env = family_envelope({FamilyKind::kDelayRange, 0.13 - 1e-12, 0.13, 5}, 5.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(env[i], shifted_delay_magnitude(0.13, 5.0, grid[i]), 1e-7);
  }
}

TEST(Envelope, MonotoneUnderFamilyEnlargement) {
  const auto grid = FrequencyGrid::log_spaced(1e-2, 1e4, 300);
  // Nested sample sets: every member of the narrow family is in the wide one.
  const PerturbationFamily narrow{FamilyKind::kDelayRange, 0.04, 0.1, 4};
  const PerturbationFamily wide{FamilyKind::kDelayRange, 0.02, 0.12, 6};
  const auto a = family_envelope(narrow, 5.0, grid);
  const auto b = family_envelope(wide, 5.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_GE(b[i], a[i] * (1 - 1e-12));

  const PerturbationFamily pn{FamilyKind::kActuatorPoleRange, 9.0, 11.0, 3};
  const PerturbationFamily pw{FamilyKind::kActuatorPoleRange, 8.0, 12.0, 5};
  const auto c = family_envelope(pn, 5.0, grid);
  const auto d = family_envelope(pw, 5.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_GE(d[i], c[i] * (1 - 1e-12));
}

TEST(Fit, DelayFamilyAnchorsAndDenseValidation) {
  const auto family = PerturbationFamily::delay_up_to(0.13);
  const auto grid = FrequencyGrid::log_spaced(1e-2, 1e4, 400);
  const auto env = family_envelope(family, 5.0, grid);
  const auto bound = fit_first_order_bound(env, grid);
  EXPECT_GT(bound.a0, 0.0);
  EXPECT_GT(bound.b0, 0.0);
  EXPECT_GE(bound.b1, 2.384);
  EXPECT_GE(bound.dc_gain(), 0.384);
  EXPECT_LE(bound.b1, 2.0 * kAnchorHf);
  EXPECT_LE(bound.dc_gain(), 2.0 * kAnchorDc);
  EXPECT_TRUE(lti::is_stable(bound.state_space()));
  EXPECT_GT(bound.b0 / bound.b1, 0.0);  // minimum phase zero

  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_GE(bound.magnitude(grid[i]), 1.02 * env[i] * (1 - 1e-12));
  }
  const auto dense = FrequencyGrid::log_spaced(1e-2, 1e4, 1600);
  EXPECT_GE(bound_slack(bound.state_space(), family_envelope(family, 5.0, dense), dense), 0.0);
}

TEST(Fit, MagnitudeAgreesWithStateSpace) {
  const FirstOrderBound b{14.48, 5.81, 2.84};
  for (double w : {0.0, 0.3, 14.48, 1e3}) {
    EXPECT_NEAR(b.magnitude(w), std::abs(lti::freq_response_siso(b.state_space(), w)), 1e-12);
  }
}

TEST(Fit, ConstantEnvelope) {
  const auto grid = FrequencyGrid::log_spaced(1e-2, 1e3, 200);
  const std::vector<double> env(grid.size(), 0.7);
  const auto b = fit_first_order_bound(env, grid);
  EXPECT_GE(b.dc_gain(), 0.7);
  const auto dense = FrequencyGrid::log_spaced(1e-3, 1e5, 2000);
  for (double w : dense.omegas()) EXPECT_GE(b.magnitude(w), 0.7);
}

TEST(Fit, ActuatorFamilyGivesStableFilter) {
  const PerturbationFamily fam{FamilyKind::kActuatorPoleRange, 8.0, 12.0, 20};
  const auto grid = FrequencyGrid::log_spaced(1e-2, 1e4, 400);
  const auto env = family_envelope(fam, 5.0, grid);
  const auto b = fit_first_order_bound(env, grid);
  const auto iqc = build_iqc(b.state_space(), 5.0, 0.1);
  EXPECT_TRUE(lti::is_stable(iqc.filter));
  EXPECT_LT(iqc.filter.a()(0, 0), -2.5);
  const auto dense = FrequencyGrid::log_spaced(1e-2, 1e4, 1600);
  EXPECT_GE(bound_slack(b.state_space(), family_envelope(fam, 5.0, dense), dense), 0.0);
}

TEST(Fit, FailureReportsWorstFrequency) {
  const auto grid = FrequencyGrid::log_spaced(1e-2, 1e2, 50);
  std::vector<double> env(grid.size(), 0.01);
  env[1] = 1.0;  // sharp rise right above the lowest candidate pole
  FitOptions opt;
  opt.search_lo_factor = 1.0;
  opt.search_hi_factor = 1.0;
  opt.search_points = 50;
  try {
    fit_first_order_bound(env, grid, opt);
    FAIL() << "expected FitFailure";
  } catch (const FitFailure& e) {
    EXPECT_DOUBLE_EQ(e.worst_omega(), grid[1]);
  }
  EXPECT_THROW(fit_first_order_bound(std::vector<double>(grid.size(), 0.0), grid), Error);
}

TEST(PublishedFilter, SatisfiesShiftedEnvelopeOnDenseGrid) {
  const auto f = StateSpace::first_order(-16.98, 6.20, -5.70, 2.84);
  const auto ftilde = lti::shift(f, -2.5);
  const auto grid = FrequencyGrid::log_spaced(1e-2, 1e4, 1600);
  const auto env = family_envelope(ten_delays(), 5.0, grid);
  EXPECT_GE(bound_slack(ftilde, env, grid), -1e-9);
  EXPECT_NEAR(std::abs(lti::freq_response_siso(ftilde, 0.0)), 2.84 - 35.34 / 14.48, 1e-12);
}

TEST(BuildIqc, ShiftsByHalfAlpha) {
  const auto ft = StateSpace::first_order(-14.48, 6.2, -5.7, 2.84);
  const auto iqc = build_iqc(ft, 5.0, 0.1);
  EXPECT_NEAR(iqc.filter.a()(0, 0), -16.98, 1e-12);
  EXPECT_EQ(iqc.filter.d()(0, 0), 2.84);
  EXPECT_EQ(iqc.alpha, 5.0);
  EXPECT_EQ(iqc.lambda, 0.1);
  EXPECT_EQ(build_iqc(ft, 0.0, 1.0).filter.a(), ft.a());
  const auto back = lti::shift(iqc.filter, -2.5);
  for (double w : {0.1, 1.0, 10.0, 100.0}) {
    EXPECT_NEAR(std::abs(lti::freq_response_siso(back, w) - lti::freq_response_siso(ft, w)), 0.0,
                1e-12);
  }
  EXPECT_THROW(build_iqc(ft, 5.0, 0.0), InvalidArgument);
}

TEST(CheckIqc, TrivialSignals) {
  const IqcSpec iqc{StateSpace::first_order(-16.98, 6.2, -5.7, 2.84), 5.0, 0.1};
  std::mt19937_64 rng(2);
  const auto u = piecewise(rng, 2000, 50);
  const std::vector<double> zero(u.size(), 0.0);
  EXPECT_EQ(check_iqc_numeric(iqc, u, zero, 1e-3), 0.0);
  EXPECT_EQ(check_iqc_numeric(iqc, zero, zero, 1e-3), 0.0);
  EXPECT_THROW(check_iqc_numeric(iqc, u, std::vector<double>(10, 0.0), 1e-3), InvalidArgument);
}

TEST(CheckIqc, MatchesIndependentTrapezoid) {
  const IqcSpec iqc{StateSpace::first_order(-16.98, 6.2, -5.7, 2.84), 5.0, 0.1};
  std::mt19937_64 rng(4);
  const double dt = 1e-3;
  const auto u = piecewise(rng, 500, 50);
  const auto w = delay_perturbation(u, 0.13, dt);
  // Scalar ZOH filter and trapezoid written out directly.
  const double a = -16.98, b = 6.2, c = -5.7, d = 2.84;
  const double phi = std::exp(a * dt), gam = (b / a) * (phi - 1.0);
  double x = 0.0, integral = 0.0, worst = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double z = c * x + d * u[k];
    const double f = std::exp(5.0 * k * dt) * (z * z - w[k] * w[k]);
    if (k > 0) integral += 0.5 * dt * (prev + f);
    worst = std::min(worst, integral);
    prev = f;
    x = phi * x + gam * u[k];
  }
  EXPECT_NEAR(check_iqc_numeric(iqc, u, w, dt), worst, 1e-9 * (1 + std::abs(worst)));
}

TEST(CheckIqc, FittedAndPublishedFiltersSoundOnRandomDelays) {
  const double dt = 1e-3;
  const auto fam = PerturbationFamily::delay_up_to(0.13);
  const auto grid = FrequencyGrid::log_spaced(1e-2, 1e4, 400);
  const auto fitted = fit_first_order_bound(family_envelope(fam, 5.0, grid), grid);
  const std::vector<IqcSpec> filters = {
      build_iqc(fitted.state_space(), 5.0, 1.0),
      IqcSpec{StateSpace::first_order(-16.98, 6.2, -5.7, 2.84), 5.0, 1.0}};
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> taud(0.013, 0.13);
  std::vector<double> taus(10);
  for (auto& t : taus) t = taud(rng);
  for (const auto& iqc : filters) {
    for (int s = 0; s < 100; ++s) {
      const auto u = piecewise(rng, 2000, 50);
      const double energy = signal_energy(u, dt);
      for (double tau : taus) {
        const auto w = delay_perturbation(u, tau, dt);
        ASSERT_GE(check_iqc_numeric(iqc, u, w, dt), -1e-6 * energy) << tau;
      }
    }
  }
}

TEST(CheckIqc, IdentityBoundWithoutShiftFails) {
  const IqcSpec unit{StateSpace::static_gain(1.0), 0.0, 1.0};
  const double dt = 1e-3, tau = 0.5;
  // Square wave at the frequency where |e^{-jwt} - 1| = 2.
  std::vector<double> u(4000);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = ((k / 500) % 2 == 0) ? 1.0 : -1.0;
  const auto w = delay_perturbation(u, tau, dt);
  EXPECT_LT(check_iqc_numeric(unit, u, w, dt), -1e-6 * signal_energy(u, dt));
}

TEST(DelayPerturbation, SampleAlignedWithZeroPrefix) {
  const std::vector<double> u = {1, 2, 3, 4, 5};
  const auto w = delay_perturbation(u, 0.0021, 1e-3);  // rounds to 2 steps
  const std::vector<double> want = {-1, -2, 1 - 3, 2 - 4, 3 - 5};
  ASSERT_EQ(w.size(), want.size());
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_DOUBLE_EQ(w[i], want[i]);
  EXPECT_DOUBLE_EQ(signal_energy(u, 0.5), 0.5 * 55);
}
