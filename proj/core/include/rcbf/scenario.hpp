#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcbf/keyvalue.hpp"
#include "rcbf/sim.hpp"
#include "rcbf/uncertainty.hpp"

namespace rcbf::scenario {

enum class IqcSource {
  kNone,    ///< No IQC channels.
  kFilter,  ///< F(s) given directly as first-order (A, B, C, D).
  kFit,     ///< F(s) fitted from a perturbation family at load time.
};

struct FitSettings {
  uncertainty::PerturbationFamily family{uncertainty::FamilyKind::kDelayRange, 0.0013, 0.13, 20};
  double margin = 0.02;
  double omega_min = 1e-2;
  double omega_max = 1e4;
  std::size_t grid_points = 400;
};

struct IqcBlock {
  IqcSource source = IqcSource::kNone;
  std::array<double, 4> filter{-16.98, 6.20, -5.70, 2.84};
  /// Defaults to the controller alpha when unset.
  std::optional<double> alpha;
  std::array<double, 2> lambda{0.1, 0.1};
  FitSettings fit;
};

struct OutputBlock {
  std::string dir = "out";
  std::string prefix = "run";
};

/// Full experiment description as read from a sectioned key-value file.
struct ScenarioConfig {
  sim::SimConfig sim;  ///< iqc left empty; filled by resolve().
  IqcBlock iqc;
  double safety_tolerance = 1e-6;
  OutputBlock output;

  double iqc_alpha() const { return iqc.alpha.value_or(sim.obstacle.alpha); }
};

/// Builds a config from a document. Unknown sections or keys and invalid
/// values throw ConfigError naming the offending section.key.
ScenarioConfig from_document(const kv::Document& doc);
kv::Document to_document(const ScenarioConfig& config);

ScenarioConfig parse(std::string_view text, const std::vector<std::string>& overrides = {});
ScenarioConfig load(const std::filesystem::path& path,
                    const std::vector<std::string>& overrides = {});
std::string serialize(const ScenarioConfig& config);

/// Result of running the fitting pipeline for a family.
struct FitOutcome {
  lti::FrequencyGrid grid;
  std::vector<double> envelope;
  uncertainty::FirstOrderBound bound;
  uncertainty::IqcSpec iqc;  ///< lambda = 1; callers set per channel.
};

FitOutcome run_fit(const FitSettings& settings, double alpha);

/// IQC specs for the configured source (empty for kNone).
std::vector<uncertainty::IqcSpec> resolve_iqc(const ScenarioConfig& config);

/// SimConfig with IQC channels resolved.
sim::SimConfig resolve(const ScenarioConfig& config);

std::string_view to_string(sim::FilterMode mode);
std::string_view to_string(sim::UncertaintyMode mode);
std::string_view to_string(IqcSource source);
std::string_view to_string(uncertainty::FamilyKind kind);

}  // namespace rcbf::scenario
