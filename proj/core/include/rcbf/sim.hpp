#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rcbf/barrier.hpp"
#include "rcbf/qcqp.hpp"
#include "rcbf/uncertainty.hpp"

namespace rcbf::sim {

struct PlantState {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  double t = 0.0;
};

/// u0 = K ([r; 0] - [p; v]). The default gain is the LQR design for
/// Q = diag(1, 1, 1.75, 1.75), R = I.
struct BaselineGain {
  Eigen::Matrix<double, 2, 4> k;

  static BaselineGain standard();
};

Eigen::Vector2d baseline_control(const BaselineGain& gain, const PlantState& state,
                                 const Eigen::Vector2d& r);

/// Linear ramp from `start` to `goal` over `ramp_duration`, then held (or
/// extrapolated when hold_after is false).
struct ReferenceProfile {
  Eigen::Vector2d start{-10.0, 0.0};
  Eigen::Vector2d goal{10.0, 0.0};
  double ramp_duration = 45.0;
  bool hold_after = true;

  void validate() const;
  Eigen::Vector2d at(double t) const;
};

/// Exact double-integrator step with the acceleration held over dt.
PlantState step_plant(const PlantState& state, const Eigen::Vector2d& applied, double dt);

/// Fixed-length delay of a vector signal. Reads before the line fills
/// return zero.
class DelayLine {
 public:
  DelayLine(std::size_t delay_steps, Eigen::Index channels);
  static DelayLine from_seconds(double tau, double dt, Eigen::Index channels);

  /// Pushes the current input and returns the input from delay_steps ago.
  Eigen::VectorXd push(const Eigen::VectorXd& u);
  std::size_t delay_steps() const noexcept { return delay_steps_; }

 private:
  std::size_t delay_steps_;
  std::vector<Eigen::VectorXd> buffer_;
  std::size_t head_ = 0;
};

enum class UncertaintyMode { kNone, kDelay, kActuator };

struct UncertaintyConfig {
  UncertaintyMode mode = UncertaintyMode::kNone;
  double tau = 0.0;    ///< Delay in seconds (kDelay).
  double pole = 10.0;  ///< Actuator pole p in p / (s + p), rad/s (kActuator).

  void validate() const;
};

/// Realizes the unmodeled input dynamics between the safety filter and the
/// plant. Holds the delay line or the per-channel actuator states.
class InputUncertainty {
 public:
  InputUncertainty(const UncertaintyConfig& config, double dt);

  /// Input actually reaching the plant over the next step.
  Eigen::Vector2d apply(const Eigen::Vector2d& commanded);

 private:
  UncertaintyConfig config_;
  std::optional<DelayLine> delay_;
  Eigen::Vector2d actuator_state_ = Eigen::Vector2d::Zero();
  double actuator_phi_ = 0.0;
  double actuator_gamma_ = 0.0;
};

enum class FilterMode { kOff, kEcbf, kRobustEcbf };

struct SimConfig {
  PlantState initial{Eigen::Vector2d(-10.0, 0.0), Eigen::Vector2d::Zero(), 0.0};
  barrier::BarrierSpec obstacle{Eigen::Vector2d(2.0, -0.2), 1.5, 5.0};
  BaselineGain gain = BaselineGain::standard();
  ReferenceProfile reference;
  FilterMode filter = FilterMode::kEcbf;
  UncertaintyConfig uncertainty;
  /// One alpha-IQC per input channel (x then y). Required for kRobustEcbf;
  /// when present in other modes the filter states and running integrals
  /// are still propagated and logged.
  std::vector<uncertainty::IqcSpec> iqc;
  double dt = 1e-3;
  double horizon = 60.0;

  void validate() const;
  std::size_t steps() const;
};

enum class StepStatus { kOff, kUnconstrained, kActive, kInfeasible };

std::string_view to_string(StepStatus status);

struct TrajectoryRecord {
  double t = 0.0;
  Eigen::Vector2d p, v, r;
  Eigen::Vector2d u_baseline, u_safe, u_applied;
  double h = 0.0, hdot = 0.0, htilde = 0.0;
  /// First filter-state component of each channel's IQC (zero if unused).
  Eigen::Vector2d x_f = Eigen::Vector2d::Zero();
  StepStatus status = StepStatus::kOff;
  /// Running integral of e^{alpha t}(z^2 - w^2) summed over channels, up to
  /// and including this sample.
  double iqc_integral = 0.0;

  Eigen::Vector2d w() const { return u_applied - u_safe; }
};

struct RunSummary {
  std::size_t steps = 0;
  double min_h = 0.0;
  double min_clearance = 0.0;
  double final_position_error = 0.0;
  std::size_t infeasible_steps = 0;
  std::size_t active_steps = 0;
  double tv_ux = 0.0;
  double tv_uy = 0.0;
  double worst_iqc_integral = 0.0;
  bool aborted = false;
  std::string failure;
};

struct SimResult {
  std::vector<TrajectoryRecord> records;
  RunSummary summary;
  PlantState final_state;
};

/// Runs the fixed-step closed loop. A solver NumericalFailure stops the run
/// and is reported in summary.aborted / summary.failure with the log so far.
SimResult run_closed_loop(const SimConfig& config);

/// Sum of |u_k+1 - u_k| for the safe input on samples with t in [t0, t1].
double total_variation(const std::vector<TrajectoryRecord>& records, int channel,
                       double t0 = -1e300, double t1 = 1e300);

}  // namespace rcbf::sim
