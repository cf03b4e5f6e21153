#include "rcbf/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "rcbf/error.hpp"

namespace rcbf::report {

namespace {

using kv::format_double;

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(kv::trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = {
      "t",  "px", "py", "vx",   "vy",     "rx",   "ry",     "u0x",  "u0y",     "ux",
      "uy", "wx", "wy", "h",    "hdot",   "htilde", "xF_x", "xF_y", "status", "iqc_int"};
  return cols;
}

void write_trajectory_csv(std::ostream& out, const std::vector<sim::TrajectoryRecord>& records) {
  const auto& cols = trajectory_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    const Eigen::Vector2d w = r.w();
    const double values[] = {r.t,          r.p(0),         r.p(1),         r.v(0),   r.v(1),
                             r.r(0),       r.r(1),         r.u_baseline(0), r.u_baseline(1),
                             r.u_safe(0),  r.u_safe(1),    w(0),           w(1),     r.h,
                             r.hdot,       r.htilde,       r.x_f(0),       r.x_f(1)};
    for (double v : values) out << format_double(v) << ',';
    out << sim::to_string(r.status) << ',' << format_double(r.iqc_integral) << '\n';
  }
}

std::string trajectory_csv(const std::vector<sim::TrajectoryRecord>& records) {
  std::ostringstream out;
  write_trajectory_csv(out, records);
  return out.str();
}

std::size_t Table::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InvalidArgument("csv: no column " + std::string(name));
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::numeric_column(std::string_view name) const {
  const auto idx = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(kv::parse_double(row.at(idx)));
  return out;
}

Table parse_csv(std::string_view text) {
  Table t;
  std::size_t start = 0;
  bool header = true;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = kv::trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (header) {
      t.columns = std::move(cells);
      header = false;
    } else {
      if (cells.size() != t.columns.size()) throw InvalidArgument("csv: ragged row");
      t.rows.push_back(std::move(cells));
    }
  }
  if (header) throw InvalidArgument("csv: missing header");
  return t;
}

bool run_is_safe(const sim::RunSummary& s, double safety_tolerance) {
  return !s.aborted && s.infeasible_steps == 0 && s.min_h >= -safety_tolerance;
}

kv::Document summary_document(const sim::RunSummary& s, double safety_tolerance) {
  kv::Document d;
  d.set("", "steps", std::to_string(s.steps));
  d.set("", "min_h", format_double(s.min_h));
  d.set("", "min_clearance", format_double(s.min_clearance));
  d.set("", "final_position_error", format_double(s.final_position_error));
  d.set("", "infeasible_steps", std::to_string(s.infeasible_steps));
  d.set("", "active_steps", std::to_string(s.active_steps));
  d.set("", "tv_ux", format_double(s.tv_ux));
  d.set("", "tv_uy", format_double(s.tv_uy));
  d.set("", "worst_iqc_integral", format_double(s.worst_iqc_integral));
  d.set("", "aborted", s.aborted ? "true" : "false");
  d.set("", "safe", run_is_safe(s, safety_tolerance) ? "true" : "false");
  if (s.aborted) d.set("", "failure", s.failure);
  return d;
}

std::string summary_text(const sim::RunSummary& s, double safety_tolerance) {
  return summary_document(s, safety_tolerance).serialize();
}

std::string render_path_svg(std::string_view trajectory_csv, const Eigen::Vector2d& center,
                            double radius) {
  const auto table = parse_csv(trajectory_csv);
  const auto px = table.numeric_column("px");
  const auto py = table.numeric_column("py");

  double xmin = center(0) - radius, xmax = center(0) + radius;
  double ymin = center(1) - radius, ymax = center(1) + radius;
  for (std::size_t i = 0; i < px.size(); ++i) {
    xmin = std::min(xmin, px[i]);
    xmax = std::max(xmax, px[i]);
    ymin = std::min(ymin, py[i]);
    ymax = std::max(ymax, py[i]);
  }
  const double pad = 0.05 * std::max(xmax - xmin, ymax - ymin) + 0.5;
  xmin -= pad;
  xmax += pad;
  ymin -= pad;
  ymax += pad;

  constexpr double kWidth = 900.0;
  const double scale = kWidth / (xmax - xmin);
  const double height = std::ceil((ymax - ymin) * scale);
  const auto sx = [&](double x) { return (x - xmin) * scale; };
  const auto sy = [&](double y) { return (ymax - y) * scale; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(kWidth, 0)
      << "\" height=\"" << fixed(height, 0) << "\" viewBox=\"0 0 " << fixed(kWidth, 0) << ' '
      << fixed(height, 0) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<circle cx=\"" << fixed(sx(center(0))) << "\" cy=\"" << fixed(sy(center(1)))
      << "\" r=\"" << fixed(radius * scale) << "\" fill=\"#7fdfdf\" stroke=\"#2a8f8f\"/>\n";

  // Decimate long runs to at most ~2000 vertices.
  const std::size_t stride = std::max<std::size_t>(1, px.size() / 2000);
  svg << "<polyline fill=\"none\" stroke=\"#1f4fbf\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < px.size(); i += stride) {
    svg << fixed(sx(px[i])) << ',' << fixed(sy(py[i])) << ' ';
  }
  if (!px.empty()) svg << fixed(sx(px.back())) << ',' << fixed(sy(py.back()));
  svg << "\"/>\n</svg>\n";
  return svg.str();
}

std::string fit_text(const scenario::FitOutcome& fit, double alpha) {
  kv::Document d;
  const auto& f = fit.iqc.filter;
  d.set("", "a0", format_double(fit.bound.a0));
  d.set("", "b0", format_double(fit.bound.b0));
  d.set("", "b1", format_double(fit.bound.b1));
  d.set("", "dc_gain", format_double(fit.bound.dc_gain()));
  d.set("", "alpha", format_double(alpha));
  d.set("", "A", format_double(f.a()(0, 0)));
  d.set("", "B", format_double(f.b()(0, 0)));
  d.set("", "C", format_double(f.c()(0, 0)));
  d.set("", "D", format_double(f.d()(0, 0)));
  return d.serialize();
}

std::string fit_bound_csv(const scenario::FitOutcome& fit) {
  std::ostringstream out;
  out << "omega,envelope,bound_magnitude\n";
  for (std::size_t i = 0; i < fit.grid.size(); ++i) {
    out << format_double(fit.grid[i]) << ',' << format_double(fit.envelope[i]) << ','
        << format_double(fit.bound.magnitude(fit.grid[i])) << '\n';
  }
  return out.str();
}

}  // namespace rcbf::report
