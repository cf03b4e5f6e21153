#include "rcbf_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "rcbf/error.hpp"
#include "rcbf/keyvalue.hpp"
#include "rcbf/report.hpp"
#include "rcbf/scenario.hpp"
#include "rcbf/sim.hpp"

namespace rcbf::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

struct CommonOptions {
  std::string config;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  double dt = 0.0;  // 0 = use the config value
};

void add_common(CLI::App* cmd, CommonOptions& o, bool need_config) {
  auto* cfg = cmd->add_option("--config", o.config, "Scenario configuration file");
  if (need_config) cfg->required();
  cmd->add_option("--out", o.out_dir, "Output directory (overrides output.dir)");
  cmd->add_option("--set", o.overrides, "Override section.key=value")->take_all();
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--dt", o.dt, "Step size override (s)");
}

std::vector<std::string> overrides_with_dt(const CommonOptions& o) {
  auto ov = o.overrides;
  if (o.dt != 0.0) ov.push_back("numerics.dt=" + kv::format_double(o.dt));
  if (!o.out_dir.empty()) ov.push_back("output.dir=" + o.out_dir);
  return ov;
}

// --- simulate --------------------------------------------------------------

int cmd_simulate(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  scenario::ScenarioConfig config;
  sim::SimConfig sim_config;
  try {
    config = scenario::load(o.config, overrides_with_dt(o));
    sim_config = scenario::resolve(config);
  } catch (const FitFailure& e) {
    err << "fit failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const auto result = sim::run_closed_loop(sim_config);
  const fs::path dir = config.output.dir;
  const std::string& prefix = config.output.prefix;
  const auto csv = report::trajectory_csv(result.records);
  const auto summary = report::summary_text(result.summary, config.safety_tolerance);
  try {
    write_file(dir / (prefix + "_trajectory.csv"), csv);
    write_file(dir / (prefix + "_summary.txt"), summary);
    write_file(dir / (prefix + "_path.svg"),
               report::render_path_svg(csv, sim_config.obstacle.center, sim_config.obstacle.radius));
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitConfigError;
  }
  out << summary;
  if (result.summary.aborted) {
    err << "numerical failure: " << result.summary.failure << '\n';
    return kExitNumericalFailure;
  }
  return kExitOk;
}

// --- fit-iqc ---------------------------------------------------------------

struct FitCliOptions {
  std::string family = "delay";
  std::vector<double> range;
  double tau_max = 0.0;
  std::size_t samples = 20;
  double alpha = 5.0;
  double margin = 0.02;
  std::vector<double> grid;
  std::string prefix = "iqc";
};

int cmd_fit_iqc(const CommonOptions& o, const FitCliOptions& f, const CLI::App& cmd,
                std::ostream& out, std::ostream& err) {
  scenario::FitSettings settings;
  double alpha = f.alpha;
  std::string out_dir = o.out_dir.empty() ? "out" : o.out_dir;
  try {
    if (!o.config.empty()) {
      const auto config = scenario::load(o.config, o.overrides);
      settings = config.iqc.fit;
      alpha = config.iqc_alpha();
      if (o.out_dir.empty()) out_dir = config.output.dir;
    }
    if (cmd.count("--family") > 0 || o.config.empty()) {
      if (f.family == "delay") settings.family.kind = uncertainty::FamilyKind::kDelayRange;
      else if (f.family == "actuator") settings.family.kind = uncertainty::FamilyKind::kActuatorPoleRange;
      else throw ConfigError("--family: expected delay or actuator");
    }
    if (cmd.count("--alpha") > 0) alpha = f.alpha;
    if (cmd.count("--tau-max") > 0) {
      settings.family.param_lo = 0.01 * f.tau_max;
      settings.family.param_hi = f.tau_max;
    }
    if (!f.range.empty()) {
      if (f.range.size() != 2) throw ConfigError("--range: expected lo,hi");
      settings.family.param_lo = f.range[0];
      settings.family.param_hi = f.range[1];
    }
    if (cmd.count("--samples") > 0 || o.config.empty()) settings.family.n_samples = f.samples;
    if (cmd.count("--margin") > 0 || o.config.empty()) settings.margin = f.margin;
    if (!f.grid.empty()) {
      if (f.grid.size() != 3) throw ConfigError("--grid: expected omega_min,omega_max,points");
      settings.omega_min = f.grid[0];
      settings.omega_max = f.grid[1];
      settings.grid_points = static_cast<std::size_t>(f.grid[2]);
    }
    if (!(alpha >= 0.0)) throw ConfigError("--alpha: must be >= 0");
    try {
      settings.family.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("family: ") + e.what());
    }
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    const auto fit = scenario::run_fit(settings, alpha);
    const auto text = report::fit_text(fit, alpha);
    write_file(fs::path(out_dir) / (f.prefix + "_filter.txt"), text);
    write_file(fs::path(out_dir) / (f.prefix + "_bound.csv"), report::fit_bound_csv(fit));
    out << text;
    return kExitOk;
  } catch (const FitFailure& e) {
    err << "fit failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  } catch (const ShiftedInstability& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
}

// --- check-iqc -------------------------------------------------------------

struct CheckCliOptions {
  std::string filter_file;
  std::vector<double> coeffs;
  double alpha = 0.0;
  double tau = 0.0;
  std::vector<double> tau_range;
  std::size_t delays = 10;
  std::string signal_file;
  std::size_t signals = 100;
  double duration = 2.0;
};

int cmd_check_iqc(const CommonOptions& o, const CheckCliOptions& c, const CLI::App& cmd,
                  std::ostream& out, std::ostream& err) {
  uncertainty::IqcSpec iqc{lti::StateSpace::static_gain(1.0), 0.0, 1.0};
  IqcCheckSettings settings;
  settings.seed = o.seed;
  settings.signals = c.signals;
  settings.duration = c.duration;
  if (o.dt != 0.0) settings.dt = o.dt;
  std::optional<double> alpha;
  if (cmd.count("--alpha") > 0) alpha = c.alpha;
  std::vector<double> taus;
  try {
    if (!c.filter_file.empty()) {
      iqc = read_filter_file(c.filter_file, alpha);
    } else if (!c.coeffs.empty()) {
      if (c.coeffs.size() == 1) {
        iqc.filter = lti::StateSpace::static_gain(c.coeffs[0]);
      } else if (c.coeffs.size() == 4) {
        iqc.filter = lti::StateSpace::first_order(c.coeffs[0], c.coeffs[1], c.coeffs[2], c.coeffs[3]);
      } else {
        throw ConfigError("--coeffs: expected D or A,B,C,D");
      }
      iqc.alpha = alpha.value_or(0.0);
    } else {
      throw ConfigError("one of --filter or --coeffs is required");
    }
    iqc.validate();
    if (c.signal_file.empty()) {
      if (!c.tau_range.empty()) {
        if (c.tau_range.size() != 2 || !(c.tau_range[0] >= 0.0) ||
            !(c.tau_range[1] >= c.tau_range[0]) || c.delays < 1) {
          throw ConfigError("--tau-range: expected 0 <= lo <= hi and --delays >= 1");
        }
        for (std::size_t i = 0; i < c.delays; ++i) {
          const double frac = c.delays == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(c.delays - 1);
          taus.push_back(c.tau_range[0] + frac * (c.tau_range[1] - c.tau_range[0]));
        }
      } else if (cmd.count("--tau") > 0) {
        if (!(c.tau >= 0.0)) throw ConfigError("--tau: must be >= 0");
        taus.push_back(c.tau);
      } else {
        throw ConfigError("one of --tau, --tau-range or --signal is required");
      }
    }
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  IqcCheckResult result;
  if (!c.signal_file.empty()) {
    try {
      const auto table = report::parse_csv(read_file(c.signal_file));
      const auto u = table.numeric_column("u");
      const auto w = table.numeric_column("w");
      const double worst = uncertainty::check_iqc_numeric(iqc, u, w, settings.dt);
      const double energy = uncertainty::signal_energy(u, settings.dt);
      result.worst_integral = worst;
      result.worst_ratio = energy > 0.0 ? worst / energy : 0.0;
      result.trials = 1;
      result.passed = worst >= -settings.tolerance * energy;
    } catch (const Error& e) {
      err << "signal file error: " << e.what() << '\n';
      return kExitConfigError;
    }
  } else {
    result = check_iqc_delays(iqc, taus, settings);
  }

  out << "seed = " << settings.seed << '\n'
      << "trials = " << result.trials << '\n'
      << "alpha = " << kv::format_double(iqc.alpha) << '\n'
      << "worst_integral = " << kv::format_double(result.worst_integral) << '\n'
      << "worst_ratio = " << kv::format_double(result.worst_ratio) << '\n'
      << "threshold_ratio = " << kv::format_double(-settings.tolerance) << '\n'
      << "result = " << (result.passed ? "pass" : "fail") << '\n';
  return result.passed ? kExitOk : kExitCheckFailure;
}

// --- sweep -----------------------------------------------------------------

struct SweepCliOptions {
  std::string param;
  std::vector<double> values;
  std::string prefix;
};

struct SweepRow {
  double value = 0.0;
  sim::RunSummary summary;
  std::string error;
};

std::vector<std::string> sweep_overrides(const std::string& param, double v) {
  const auto s = kv::format_double(v);
  if (param == "tau") return {"uncertainty.mode=delay", "uncertainty.tau=" + s};
  if (param == "lambda") return {"iqc.lambda=" + s};
  if (param == "alpha") return {"controller.alpha=" + s};
  throw ConfigError("--param: expected tau, lambda or alpha");
}

int cmd_sweep(const CommonOptions& o, const SweepCliOptions& s, std::ostream& out,
              std::ostream& err) {
  std::string base_text;
  scenario::ScenarioConfig base;
  try {
    if (s.values.empty()) throw ConfigError("--values: at least one value is required");
    base_text = read_file(o.config);
    base = scenario::parse(base_text, overrides_with_dt(o));
    (void)sweep_overrides(s.param, s.values.front());
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const auto base_overrides = overrides_with_dt(o);
  std::vector<std::future<SweepRow>> jobs;
  for (double v : s.values) {
    jobs.push_back(std::async(std::launch::async, [&, v] {
      SweepRow row;
      row.value = v;
      try {
        auto ov = base_overrides;
        for (auto& extra : sweep_overrides(s.param, v)) ov.push_back(std::move(extra));
        const auto cfg = scenario::parse(base_text, ov);
        const auto result = sim::run_closed_loop(scenario::resolve(cfg));
        row.summary = result.summary;
        if (result.summary.aborted) row.error = result.summary.failure;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      return row;
    }));
  }

  std::ostringstream csv;
  csv << "value,min_h,clearance,infeasible_steps,tv_ux,tv_uy,error\n";
  for (auto& job : jobs) {
    const SweepRow row = job.get();
    std::string error = row.error;
    std::replace(error.begin(), error.end(), ',', ';');
    if (!row.error.empty() && row.summary.steps == 0) {
      csv << kv::format_double(row.value) << ",nan,nan,0,nan,nan," << error << '\n';
      continue;
    }
    csv << kv::format_double(row.value) << ',' << kv::format_double(row.summary.min_h) << ','
        << kv::format_double(row.summary.min_clearance) << ',' << row.summary.infeasible_steps << ','
        << kv::format_double(row.summary.tv_ux) << ',' << kv::format_double(row.summary.tv_uy) << ','
        << error << '\n';
  }
  const std::string prefix = s.prefix.empty() ? base.output.prefix : s.prefix;
  try {
    write_file(fs::path(base.output.dir) / (prefix + "_sweep_" + s.param + ".csv"), csv.str());
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitConfigError;
  }
  out << csv.str();
  return kExitOk;
}

}  // namespace

std::vector<double> random_piecewise_signal(std::uint64_t seed, double duration, double dwell,
                                            double dt) {
  if (!(dt > 0.0) || !(dwell > 0.0) || !(duration > 0.0)) {
    throw InvalidArgument("random_piecewise_signal: need positive duration, dwell and dt");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  const auto per = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(dwell / dt)));
  std::vector<double> u(n);
  double level = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k % per == 0) level = amp(rng);
    u[k] = level;
  }
  return u;
}

IqcCheckResult check_iqc_delays(const uncertainty::IqcSpec& iqc, const std::vector<double>& taus,
                                const IqcCheckSettings& settings) {
  IqcCheckResult result;
  result.worst_ratio = 0.0;
  for (std::size_t i = 0; i < settings.signals; ++i) {
    const auto u = random_piecewise_signal(settings.seed + i, settings.duration, settings.dwell,
                                           settings.dt);
    const double energy = uncertainty::signal_energy(u, settings.dt);
    for (double tau : taus) {
      const auto w = uncertainty::delay_perturbation(u, tau, settings.dt);
      const double worst = uncertainty::check_iqc_numeric(iqc, u, w, settings.dt);
      result.worst_integral = std::min(result.worst_integral, worst);
      if (energy > 0.0) result.worst_ratio = std::min(result.worst_ratio, worst / energy);
      if (worst < -settings.tolerance * energy) result.passed = false;
      ++result.trials;
    }
  }
  return result;
}

uncertainty::IqcSpec read_filter_file(const std::string& path, std::optional<double> alpha_override) {
  const auto doc = kv::Document::parse(read_file(path));
  const auto num = [&](const char* key) { return kv::parse_double(doc.get("", key)); };
  uncertainty::IqcSpec spec{lti::StateSpace::first_order(num("A"), num("B"), num("C"), num("D")),
                            0.0, 1.0};
  if (alpha_override) spec.alpha = *alpha_override;
  else if (doc.has("", "alpha")) spec.alpha = num("alpha");
  spec.validate();
  return spec;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust control-barrier-function safety filtering with alpha-IQCs"};
  app.require_subcommand(1);

  CommonOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Run one closed-loop scenario");
  add_common(simulate, sim_opts, true);

  CommonOptions fit_common;
  FitCliOptions fit_opts;
  auto* fit = app.add_subcommand("fit-iqc", "Fit a first-order alpha-IQC filter for a perturbation family");
  add_common(fit, fit_common, false);
  fit->add_option("--family", fit_opts.family, "delay or actuator");
  fit->add_option("--range", fit_opts.range, "Family parameter range lo,hi")->delimiter(',');
  fit->add_option("--tau-max", fit_opts.tau_max, "Delay bound; samples [0.01 tau_max, tau_max]");
  fit->add_option("--samples", fit_opts.samples, "Family members sampled");
  fit->add_option("--alpha", fit_opts.alpha, "IQC exponent alpha (1/s)");
  fit->add_option("--margin", fit_opts.margin, "Relative headroom over the envelope");
  fit->add_option("--grid", fit_opts.grid, "omega_min,omega_max,points")->delimiter(',');
  fit->add_option("--prefix", fit_opts.prefix, "Output file prefix");

  CommonOptions check_common;
  CheckCliOptions check_opts;
  auto* check = app.add_subcommand("check-iqc", "Numerically check the time-domain alpha-IQC");
  add_common(check, check_common, false);
  check->add_option("--filter", check_opts.filter_file, "Filter coefficient file from fit-iqc");
  check->add_option("--coeffs", check_opts.coeffs, "Filter as D or A,B,C,D")->delimiter(',');
  check->add_option("--alpha", check_opts.alpha, "IQC exponent alpha (1/s)");
  check->add_option("--tau", check_opts.tau, "Delay (s)");
  check->add_option("--tau-range", check_opts.tau_range, "Delay range lo,hi")->delimiter(',');
  check->add_option("--delays", check_opts.delays, "Delays sampled evenly in --tau-range");
  check->add_option("--signal", check_opts.signal_file, "CSV with columns u,w");
  check->add_option("--signals", check_opts.signals, "Random signals per delay");
  check->add_option("--duration", check_opts.duration, "Signal length (s)");

  CommonOptions sweep_common;
  SweepCliOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a list of parameter values");
  add_common(sweep, sweep_common, true);
  sweep->add_option("--param", sweep_opts.param, "tau, lambda or alpha")->required();
  sweep->add_option("--values", sweep_opts.values, "Comma-separated values")->delimiter(',');
  sweep->add_option("--prefix", sweep_opts.prefix, "Output file prefix");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (*simulate) return cmd_simulate(sim_opts, out, err);
    if (*fit) return cmd_fit_iqc(fit_common, fit_opts, *fit, out, err);
    if (*check) return cmd_check_iqc(check_common, check_opts, *check, out, err);
    if (*sweep) return cmd_sweep(sweep_common, sweep_opts, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
  return kExitConfigError;
}

}  // namespace rcbf::cli
