#include "rcbf/robust.hpp"

#include <cmath>

#include "rcbf/error.hpp"

namespace rcbf::robust {

namespace {

// Shared elimination algebra: starting from the affine part
// base + b.(u + w) >= rhs, subtract lambda_i I_i for each channel and plug in
// the worst-case w.
QuadraticConstraint assemble(const Eigen::VectorXd& b, double base, double rhs,
                             std::span<const RobustChannel> channels) {
  const Eigen::Index n = b.size();
  if (static_cast<Eigen::Index>(channels.size()) != n) {
    throw InvalidArgument("robust constraint: need exactly one IQC channel per input");
  }
  QuadraticConstraint qc;
  qc.lin = b;
  qc.quad = Eigen::VectorXd::Zero(n);
  qc.shift = Eigen::VectorXd::Zero(n);
  qc.offset = base;
  qc.rhs = rhs;

  Eigen::VectorXd seen = Eigen::VectorXd::Zero(n);
  for (const auto& ch : channels) {
    const Eigen::Index i = ch.channel_index;
    if (i < 0 || i >= n) throw InvalidArgument("robust constraint: channel index out of range");
    if (seen(i) != 0.0) throw InvalidArgument("robust constraint: duplicate channel index");
    seen(i) = 1.0;

    const double lambda = ch.iqc.lambda;
    if (!(lambda > 0.0)) throw InvalidArgument("robust constraint: lambda must be > 0");
    const double d = ch.feedthrough();
    const double sqrt_lambda = std::sqrt(lambda);
    // lambda (c + d u)^2 = (sqrt(lambda)|d| u + sgn(d) sqrt(lambda) c)^2
    const double sign = d < 0.0 ? -1.0 : 1.0;
    qc.quad(i) = lambda * d * d;
    qc.shift(i) = sign * sqrt_lambda * ch.free_output();
    qc.offset -= b(i) * b(i) / (4.0 * lambda);
  }
  return qc;
}

}  // namespace

RobustChannel RobustChannel::at_rest(uncertainty::IqcSpec iqc, Eigen::Index channel_index) {
  iqc.validate();
  const auto n = iqc.filter.order();
  return RobustChannel{std::move(iqc), Eigen::VectorXd::Zero(n), channel_index};
}

double RobustChannel::free_output() const {
  if (iqc.filter.order() == 0) return 0.0;
  if (x_f.size() != iqc.filter.order()) {
    throw InvalidArgument("RobustChannel: filter state dimension mismatch");
  }
  return (iqc.filter.c() * x_f)(0);
}

double QuadraticConstraint::value(const Eigen::VectorXd& u) const {
  const Eigen::ArrayXd r = quad.array().sqrt() * u.array() + shift.array();
  return lin.dot(u) - r.square().sum() + offset;
}

Eigen::VectorXd QuadraticConstraint::gradient(const Eigen::VectorXd& u) const {
  const Eigen::ArrayXd sq = quad.array().sqrt();
  return lin.array() - 2.0 * sq * (sq * u.array() + shift.array());
}

void QuadraticConstraint::validate() const {
  const auto n = lin.size();
  if (quad.size() != n || shift.size() != n) {
    throw InvalidArgument("QuadraticConstraint: dimension mismatch");
  }
  if ((quad.array() < 0.0).any()) {
    throw InvalidArgument("QuadraticConstraint: curvature coefficients must be >= 0");
  }
  if (!lin.allFinite() || !quad.allFinite() || !shift.allFinite() || !std::isfinite(offset) ||
      !std::isfinite(rhs)) {
    throw InvalidArgument("QuadraticConstraint: non-finite coefficient");
  }
}

QuadraticConstraint QuadraticConstraint::from_affine(const barrier::AffineConstraint& c) {
  const auto n = c.lin.size();
  return {Eigen::VectorXd::Zero(n), c.lin, Eigen::VectorXd::Zero(n), 0.0, c.rhs};
}

double iqc_integrand(const RobustChannel& channel, double u_i, double w_i) {
  const double z = channel.free_output() + channel.feedthrough() * u_i;
  return z * z - w_i * w_i;
}

Eigen::VectorXd worst_case_w(const Eigen::VectorXd& input_gain,
                             std::span<const double> lambdas) {
  if (static_cast<Eigen::Index>(lambdas.size()) != input_gain.size()) {
    throw InvalidArgument("worst_case_w: one lambda per channel required");
  }
  Eigen::VectorXd w(input_gain.size());
  for (Eigen::Index i = 0; i < input_gain.size(); ++i) {
    const double lambda = lambdas[static_cast<std::size_t>(i)];
    if (!(lambda > 0.0)) throw InvalidArgument("worst_case_w: lambda must be > 0");
    w(i) = -input_gain(i) / (2.0 * lambda);
  }
  return w;
}

QuadraticConstraint robust_ecbf_constraint(const barrier::BarrierSpec& spec,
                                           const barrier::BarrierEval& eval,
                                           std::span<const RobustChannel> channels) {
  const double a = spec.alpha;
  return assemble(eval.hddot_input_gain, eval.hddot_drift, -a * a * eval.h - 2.0 * a * eval.hdot,
                  channels);
}

QuadraticConstraint robust_cbf_constraint_rd1(double lf_h, const Eigen::VectorXd& lg_h,
                                              double h, double alpha,
                                              std::span<const RobustChannel> channels) {
  return assemble(lg_h, lf_h, -alpha * h, channels);
}

}  // namespace rcbf::robust
