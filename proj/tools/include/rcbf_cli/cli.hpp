#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rcbf/uncertainty.hpp"

namespace rcbf::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitNumericalFailure = 3,
  kExitCheckFailure = 4,
};

/// Entry point shared by the rcbf binary and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Settings for the randomized alpha-IQC check.
struct IqcCheckSettings {
  std::uint64_t seed = 1;
  std::size_t signals = 100;
  double duration = 2.0;
  double dwell = 0.05;
  double dt = 1e-3;
  double tolerance = 1e-6;
};

struct IqcCheckResult {
  double worst_integral = 0.0;
  /// Smallest integral / |u|^2 over all trials.
  double worst_ratio = 0.0;
  std::size_t trials = 0;
  bool passed = true;
};

/// Piecewise-constant signal with amplitude uniform in [-1, 1].
std::vector<double> random_piecewise_signal(std::uint64_t seed, double duration, double dwell,
                                            double dt);

/// Runs check_iqc_numeric on `settings.signals` seeded random inputs for
/// each delay, with w = D_tau(u) - u. Passes when every trial stays above
/// -tolerance |u|^2.
IqcCheckResult check_iqc_delays(const uncertainty::IqcSpec& iqc, const std::vector<double>& taus,
                                const IqcCheckSettings& settings);

/// Reads an IQC filter coefficient file (keys A, B, C, D and optional alpha).
uncertainty::IqcSpec read_filter_file(const std::string& path,
                                      std::optional<double> alpha_override = std::nullopt);

}  // namespace rcbf::cli
