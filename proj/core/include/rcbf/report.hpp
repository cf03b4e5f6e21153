#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rcbf/keyvalue.hpp"
#include "rcbf/scenario.hpp"
#include "rcbf/sim.hpp"

namespace rcbf::report {

/// Column order of the trajectory CSV.
const std::vector<std::string>& trajectory_columns();

void write_trajectory_csv(std::ostream& out, const std::vector<sim::TrajectoryRecord>& records);
std::string trajectory_csv(const std::vector<sim::TrajectoryRecord>& records);

/// Parsed CSV: header plus rows of raw cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  std::vector<double> numeric_column(std::string_view name) const;
};

Table parse_csv(std::string_view text);

/// Flat key-value summary block.
kv::Document summary_document(const sim::RunSummary& summary, double safety_tolerance);
std::string summary_text(const sim::RunSummary& summary, double safety_tolerance);

/// True when min_h >= -tolerance, no infeasible steps and the run completed.
bool run_is_safe(const sim::RunSummary& summary, double safety_tolerance);

/// SVG of the (px, py) path with the obstacle disk. Depends only on the CSV
/// text and the obstacle geometry.
std::string render_path_svg(std::string_view trajectory_csv, const Eigen::Vector2d& center,
                            double radius);

/// Coefficient block for a fitted IQC: a0, b0, b1, dc_gain, alpha and the
/// shifted realization A, B, C, D.
std::string fit_text(const scenario::FitOutcome& fit, double alpha);

/// omega, envelope, bound_magnitude rows.
std::string fit_bound_csv(const scenario::FitOutcome& fit);

}  // namespace rcbf::report
