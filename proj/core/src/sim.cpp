#include "rcbf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcbf/error.hpp"
#include "rcbf/robust.hpp"

namespace rcbf::sim {

BaselineGain BaselineGain::standard() {
  BaselineGain g;
  g.k << 1.0, 0.0, 1.94, 0.0,
         0.0, 1.0, 0.0, 1.94;
  return g;
}

Eigen::Vector2d baseline_control(const BaselineGain& gain, const PlantState& state,
                                 const Eigen::Vector2d& r) {
  Eigen::Vector4d err;
  err << r - state.p, -state.v;
  return gain.k * err;
}

void ReferenceProfile::validate() const {
  if (!(ramp_duration > 0.0)) throw InvalidArgument("ReferenceProfile: ramp_duration must be > 0");
  if (!start.allFinite() || !goal.allFinite()) {
    throw InvalidArgument("ReferenceProfile: non-finite endpoint");
  }
}

Eigen::Vector2d ReferenceProfile::at(double t) const {
  double frac = t / ramp_duration;
  if (hold_after) frac = std::clamp(frac, 0.0, 1.0);
  else frac = std::max(frac, 0.0);
  return start + frac * (goal - start);
}

PlantState step_plant(const PlantState& state, const Eigen::Vector2d& applied, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("step_plant: dt must be positive");
  PlantState next;
  next.p = state.p + state.v * dt + 0.5 * applied * dt * dt;
  next.v = state.v + applied * dt;
  next.t = state.t + dt;
  return next;
}

DelayLine::DelayLine(std::size_t delay_steps, Eigen::Index channels)
    : delay_steps_(delay_steps), buffer_(delay_steps, Eigen::VectorXd::Zero(channels)) {}

DelayLine DelayLine::from_seconds(double tau, double dt, Eigen::Index channels) {
  if (tau < 0.0 || !(dt > 0.0)) throw InvalidArgument("DelayLine: need tau >= 0 and dt > 0");
  return DelayLine(static_cast<std::size_t>(std::llround(tau / dt)), channels);
}

Eigen::VectorXd DelayLine::push(const Eigen::VectorXd& u) {
  if (delay_steps_ == 0) return u;
  Eigen::VectorXd out = std::move(buffer_[head_]);
  buffer_[head_] = u;
  head_ = (head_ + 1) % delay_steps_;
  return out;
}

void UncertaintyConfig::validate() const {
  switch (mode) {
    case UncertaintyMode::kNone:
      break;
    case UncertaintyMode::kDelay:
      if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidArgument("uncertainty: tau must be >= 0");
      break;
    case UncertaintyMode::kActuator:
      if (!(pole > 0.0) || !std::isfinite(pole)) throw InvalidArgument("uncertainty: pole must be > 0");
      break;
  }
}

InputUncertainty::InputUncertainty(const UncertaintyConfig& config, double dt) : config_(config) {
  config_.validate();
  if (config_.mode == UncertaintyMode::kDelay) {
    delay_.emplace(DelayLine::from_seconds(config_.tau, dt, 2));
  } else if (config_.mode == UncertaintyMode::kActuator) {
    // p / (s + p) with state equal to the output.
    actuator_phi_ = std::exp(-config_.pole * dt);
    actuator_gamma_ = -std::expm1(-config_.pole * dt);
  }
}

Eigen::Vector2d InputUncertainty::apply(const Eigen::Vector2d& commanded) {
  switch (config_.mode) {
    case UncertaintyMode::kNone:
      return commanded;
    case UncertaintyMode::kDelay:
      return delay_->push(commanded);
    case UncertaintyMode::kActuator: {
      const Eigen::Vector2d out = actuator_state_;
      actuator_state_ = actuator_phi_ * actuator_state_ + actuator_gamma_ * commanded;
      return out;
    }
  }
  return commanded;
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("SimConfig: dt must be > 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("SimConfig: horizon must be > 0");
  if (!initial.p.allFinite() || !initial.v.allFinite()) {
    throw InvalidArgument("SimConfig: initial state must be finite");
  }
  if (!gain.k.allFinite()) throw InvalidArgument("SimConfig: gain must be finite");
  obstacle.validate();
  reference.validate();
  uncertainty.validate();
  if (!iqc.empty() && iqc.size() != 2) {
    throw InvalidArgument("SimConfig: need one IQC per input channel (2)");
  }
  for (const auto& spec : iqc) spec.validate();
  if (filter == FilterMode::kRobustEcbf && iqc.size() != 2) {
    throw InvalidArgument("SimConfig: robust-ecbf filter requires two IQC channels");
  }
}

std::size_t SimConfig::steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

std::string_view to_string(StepStatus status) {
  switch (status) {
    case StepStatus::kOff:
      return "off";
    case StepStatus::kUnconstrained:
      return "unconstrained";
    case StepStatus::kActive:
      return "active";
    case StepStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

namespace {

StepStatus from_solver(qcqp::SolveStatus s) {
  switch (s) {
    case qcqp::SolveStatus::kUnconstrained:
      return StepStatus::kUnconstrained;
    case qcqp::SolveStatus::kActive:
      return StepStatus::kActive;
    case qcqp::SolveStatus::kInfeasibleBestEffort:
      return StepStatus::kInfeasible;
  }
  return StepStatus::kOff;
}

// Filter states and running alpha-IQC integrals for each channel.
class IqcTracker {
 public:
  IqcTracker(const std::vector<uncertainty::IqcSpec>& specs, double dt) : dt_(dt) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      channels_.push_back(robust::RobustChannel::at_rest(specs[i], static_cast<Eigen::Index>(i)));
      disc_.push_back(lti::discretize_zoh(specs[i].filter, dt));
    }
    prev_integrand_.assign(specs.size(), 0.0);
    integral_.assign(specs.size(), 0.0);
  }

  bool empty() const { return channels_.empty(); }
  const std::vector<robust::RobustChannel>& channels() const { return channels_; }

  Eigen::Vector2d first_states() const {
    Eigen::Vector2d out = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < channels_.size() && i < 2; ++i) {
      if (channels_[i].x_f.size() > 0) out(static_cast<Eigen::Index>(i)) = channels_[i].x_f(0);
    }
    return out;
  }

  // Accumulates the sample at step k and advances the filters with u held.
  double advance(std::size_t k, const Eigen::Vector2d& u, const Eigen::Vector2d& w) {
    double total = 0.0;
    for (std::size_t i = 0; i < channels_.size(); ++i) {
      auto& ch = channels_[i];
      const auto idx = static_cast<Eigen::Index>(i);
      const double weight = std::exp(ch.iqc.alpha * dt_ * static_cast<double>(k));
      const double integrand = weight * robust::iqc_integrand(ch, u(idx), w(idx));
      if (k > 0) integral_[i] += 0.5 * dt_ * (prev_integrand_[i] + integrand);
      prev_integrand_[i] = integrand;
      total += integral_[i];
      if (ch.x_f.size() > 0) ch.x_f = disc_[i].phi * ch.x_f + disc_[i].gamma.col(0) * u(idx);
    }
    return total;
  }

 private:
  double dt_;
  std::vector<robust::RobustChannel> channels_;
  std::vector<lti::Discretization> disc_;
  std::vector<double> prev_integrand_;
  std::vector<double> integral_;
};

}  // namespace

SimResult run_closed_loop(const SimConfig& config) {
  config.validate();
  const std::size_t n_steps = config.steps();
  const auto& obstacle = config.obstacle;

  SimResult result;
  result.records.reserve(n_steps);
  auto& summary = result.summary;
  summary.min_h = std::numeric_limits<double>::infinity();
  summary.min_clearance = std::numeric_limits<double>::infinity();
  summary.worst_iqc_integral = 0.0;

  PlantState state = config.initial;
  InputUncertainty uncertainty(config.uncertainty, config.dt);
  IqcTracker iqc(config.iqc, config.dt);

  for (std::size_t k = 0; k < n_steps; ++k) {
    state.t = config.initial.t + config.dt * static_cast<double>(k);
    TrajectoryRecord rec;
    rec.t = state.t;
    rec.p = state.p;
    rec.v = state.v;
    rec.r = config.reference.at(state.t - config.initial.t);
    rec.u_baseline = baseline_control(config.gain, state, rec.r);

    const auto eval = barrier::eval_barrier(obstacle, state.p, state.v);
    rec.h = eval.h;
    rec.hdot = eval.hdot;
    rec.htilde = eval.htilde(obstacle.alpha);
    rec.x_f = iqc.first_states();

    try {
      switch (config.filter) {
        case FilterMode::kOff:
          rec.u_safe = rec.u_baseline;
          rec.status = StepStatus::kOff;
          break;
        case FilterMode::kEcbf: {
          const auto c = barrier::ecbf_constraint(obstacle, eval);
          const auto rep = qcqp::project_halfspace(rec.u_baseline, c.lin, c.rhs);
          rec.u_safe = rep.u;
          rec.status = from_solver(rep.status);
          break;
        }
        case FilterMode::kRobustEcbf: {
          const auto qc = robust::robust_ecbf_constraint(obstacle, eval, iqc.channels());
          const auto rep = qcqp::project_quadratic(rec.u_baseline, qc);
          rec.u_safe = rep.u;
          rec.status = from_solver(rep.status);
          break;
        }
      }
    } catch (const NumericalFailure& e) {
      summary.aborted = true;
      summary.failure = e.what();
      break;
    }

    rec.u_applied = uncertainty.apply(rec.u_safe);
    rec.iqc_integral = iqc.empty() ? 0.0 : iqc.advance(k, rec.u_safe, rec.w());

    summary.min_h = std::min(summary.min_h, rec.h);
    summary.min_clearance =
        std::min(summary.min_clearance, (state.p - obstacle.center).norm() - obstacle.radius);
    summary.worst_iqc_integral = std::min(summary.worst_iqc_integral, rec.iqc_integral);
    if (rec.status == StepStatus::kInfeasible) ++summary.infeasible_steps;
    if (rec.status == StepStatus::kActive) ++summary.active_steps;

    const Eigen::Vector2d applied = rec.u_applied;
    result.records.push_back(std::move(rec));
    state = step_plant(state, applied, config.dt);
  }
  if (!summary.aborted) state.t = config.initial.t + config.dt * static_cast<double>(n_steps);

  summary.steps = result.records.size();
  summary.final_position_error = (state.p - config.reference.goal).norm();
  summary.tv_ux = total_variation(result.records, 0);
  summary.tv_uy = total_variation(result.records, 1);
  result.final_state = state;
  return result;
}

double total_variation(const std::vector<TrajectoryRecord>& records, int channel, double t0,
                       double t1) {
  if (channel < 0 || channel > 1) throw InvalidArgument("total_variation: channel must be 0 or 1");
  double tv = 0.0;
  const TrajectoryRecord* prev = nullptr;
  for (const auto& rec : records) {
    if (rec.t < t0 || rec.t > t1) continue;
    if (prev != nullptr) tv += std::abs(rec.u_safe(channel) - prev->u_safe(channel));
    prev = &rec;
  }
  return tv;
}

}  // namespace rcbf::sim
