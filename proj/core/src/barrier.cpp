#include "rcbf/barrier.hpp"

#include <cmath>

#include "rcbf/error.hpp"

namespace rcbf::barrier {

void BarrierSpec::validate() const {
  if (!center.allFinite()) throw InvalidArgument("BarrierSpec: center must be finite");
  if (!(radius > 0.0)) throw InvalidArgument("BarrierSpec: radius must be > 0");
  if (!(alpha > 0.0)) throw InvalidArgument("BarrierSpec: alpha must be > 0");
}

BarrierEval eval_barrier(const BarrierSpec& spec, const Eigen::Vector2d& p,
                         const Eigen::Vector2d& v) {
  const Eigen::Vector2d rel = p - spec.center;
  BarrierEval e;
  e.h = rel.squaredNorm() - spec.radius * spec.radius;
  e.hdot = 2.0 * rel.dot(v);
  e.hddot_drift = 2.0 * v.squaredNorm();
  e.hddot_input_gain = 2.0 * rel;
  return e;
}

AffineConstraint ecbf_constraint(const BarrierSpec& spec, const BarrierEval& eval) {
  const double a = spec.alpha;
  return {eval.hddot_input_gain, -a * a * eval.h - 2.0 * a * eval.hdot - eval.hddot_drift};
}

AffineConstraint cbf_constraint_rd1(double lf_h, const Eigen::VectorXd& lg_h, double h,
                                    double alpha) {
  return {lg_h, -alpha * h - lf_h};
}

}  // namespace rcbf::barrier
