#include "rcbf/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "rcbf/error.hpp"

namespace rcbf::scenario {

namespace {

// Reads typed fields from a document, remembering which keys were used so
// leftovers can be rejected.
class Reader {
 public:
  explicit Reader(const kv::Document& doc) : doc_(doc) {}

  template <typename F>
  void read(const std::string& section, const std::string& key, F&& apply) {
    used_.insert(section + "." + key);
    if (!doc_.has(section, key)) return;
    try {
      apply(doc_.get(section, key));
    } catch (const Error& e) {
      throw ConfigError(section + "." + key + ": " + e.what());
    }
  }

  void reject_unknown() const {
    for (const auto& [section, entries] : doc_.sections()) {
      for (const auto& [key, value] : entries) {
        if (used_.count(section + "." + key) == 0) {
          throw ConfigError(section + "." + key + ": unknown key");
        }
      }
    }
  }

 private:
  const kv::Document& doc_;
  std::set<std::string> used_;
};

Eigen::Vector2d parse_vec2(const std::string& s) {
  const auto v = kv::parse_double_list(s);
  if (v.size() != 2) throw ConfigError("expected 2 comma-separated numbers");
  return {v[0], v[1]};
}

std::string format_vec2(const Eigen::Vector2d& v) { return kv::format_double_list({v(0), v(1)}); }

template <std::size_t N>
std::array<double, N> parse_array(const std::string& s) {
  const auto v = kv::parse_double_list(s);
  if (v.size() != N) throw ConfigError("expected " + std::to_string(N) + " comma-separated numbers");
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

template <std::size_t N>
std::string format_array(const std::array<double, N>& a) {
  return kv::format_double_list(std::vector<double>(a.begin(), a.end()));
}

sim::FilterMode parse_filter_mode(std::string_view s) {
  if (s == "off") return sim::FilterMode::kOff;
  if (s == "ecbf") return sim::FilterMode::kEcbf;
  if (s == "robust-ecbf") return sim::FilterMode::kRobustEcbf;
  throw ConfigError("expected off, ecbf or robust-ecbf");
}

sim::UncertaintyMode parse_uncertainty_mode(std::string_view s) {
  if (s == "none") return sim::UncertaintyMode::kNone;
  if (s == "delay") return sim::UncertaintyMode::kDelay;
  if (s == "actuator") return sim::UncertaintyMode::kActuator;
  throw ConfigError("expected none, delay or actuator");
}

IqcSource parse_iqc_source(std::string_view s) {
  if (s == "none") return IqcSource::kNone;
  if (s == "filter") return IqcSource::kFilter;
  if (s == "fit") return IqcSource::kFit;
  throw ConfigError("expected none, filter or fit");
}

uncertainty::FamilyKind parse_family(std::string_view s) {
  if (s == "delay") return uncertainty::FamilyKind::kDelayRange;
  if (s == "actuator") return uncertainty::FamilyKind::kActuatorPoleRange;
  throw ConfigError("expected delay or actuator");
}

std::size_t parse_count(const std::string& s) {
  const auto v = kv::parse_int(s);
  if (v < 0) throw ConfigError("expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

void validate(const ScenarioConfig& c) {
  const auto field = [](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string(name) + ": " + e.what());
    }
  };
  field("plant", [&] {
    if (!c.sim.initial.p.allFinite() || !c.sim.initial.v.allFinite()) {
      throw InvalidArgument("initial state must be finite");
    }
  });
  field("plant.obstacle_radius", [&] {
    if (!(c.sim.obstacle.radius > 0.0)) throw InvalidArgument("must be > 0");
  });
  field("controller.alpha", [&] {
    if (!(c.sim.obstacle.alpha > 0.0)) throw InvalidArgument("must be > 0");
  });
  field("reference.ramp_duration", [&] { c.sim.reference.validate(); });
  field("uncertainty", [&] { c.sim.uncertainty.validate(); });
  field("numerics.dt", [&] {
    if (!(c.sim.dt > 0.0)) throw InvalidArgument("must be > 0");
  });
  field("numerics.horizon", [&] {
    if (!(c.sim.horizon > 0.0)) throw InvalidArgument("must be > 0");
  });
  field("numerics.safety_tolerance", [&] {
    if (!(c.safety_tolerance >= 0.0)) throw InvalidArgument("must be >= 0");
  });
  field("iqc.lambda", [&] {
    if (!(c.iqc.lambda[0] > 0.0) || !(c.iqc.lambda[1] > 0.0)) throw InvalidArgument("must be > 0");
  });
  field("iqc.alpha", [&] {
    if (!(c.iqc_alpha() >= 0.0)) throw InvalidArgument("must be >= 0");
  });
  if (c.iqc.source == IqcSource::kFilter) {
    field("iqc.filter", [&] {
      const auto& f = c.iqc.filter;
      if (!lti::is_stable(lti::StateSpace::first_order(f[0], f[1], f[2], f[3]))) {
        throw InvalidArgument("filter must be stable (A < 0)");
      }
    });
  }
  if (c.iqc.source == IqcSource::kFit) {
    field("iqc.param_range", [&] { c.iqc.fit.family.validate(); });
    field("iqc.grid", [&] {
      if (!(c.iqc.fit.omega_min > 0.0) || !(c.iqc.fit.omega_max > c.iqc.fit.omega_min) ||
          c.iqc.fit.grid_points < 2) {
        throw InvalidArgument("need 0 < omega_min < omega_max and >= 2 points");
      }
    });
    field("iqc.margin", [&] {
      if (!(c.iqc.fit.margin >= 0.0)) throw InvalidArgument("must be >= 0");
    });
  }
  if (c.sim.filter == sim::FilterMode::kRobustEcbf && c.iqc.source == IqcSource::kNone) {
    throw ConfigError("controller.filter: robust-ecbf requires iqc.source = filter or fit");
  }
}

}  // namespace

std::string_view to_string(sim::FilterMode mode) {
  switch (mode) {
    case sim::FilterMode::kOff:
      return "off";
    case sim::FilterMode::kEcbf:
      return "ecbf";
    case sim::FilterMode::kRobustEcbf:
      return "robust-ecbf";
  }
  return "off";
}

std::string_view to_string(sim::UncertaintyMode mode) {
  switch (mode) {
    case sim::UncertaintyMode::kNone:
      return "none";
    case sim::UncertaintyMode::kDelay:
      return "delay";
    case sim::UncertaintyMode::kActuator:
      return "actuator";
  }
  return "none";
}

std::string_view to_string(IqcSource source) {
  switch (source) {
    case IqcSource::kNone:
      return "none";
    case IqcSource::kFilter:
      return "filter";
    case IqcSource::kFit:
      return "fit";
  }
  return "none";
}

std::string_view to_string(uncertainty::FamilyKind kind) {
  return kind == uncertainty::FamilyKind::kDelayRange ? "delay" : "actuator";
}

ScenarioConfig from_document(const kv::Document& doc) {
  ScenarioConfig c;
  Reader r(doc);
  auto& s = c.sim;

  r.read("plant", "initial_position", [&](const std::string& v) { s.initial.p = parse_vec2(v); });
  r.read("plant", "initial_velocity", [&](const std::string& v) { s.initial.v = parse_vec2(v); });
  r.read("plant", "obstacle_center", [&](const std::string& v) { s.obstacle.center = parse_vec2(v); });
  r.read("plant", "obstacle_radius", [&](const std::string& v) { s.obstacle.radius = kv::parse_double(v); });

  r.read("reference", "start", [&](const std::string& v) { s.reference.start = parse_vec2(v); });
  r.read("reference", "goal", [&](const std::string& v) { s.reference.goal = parse_vec2(v); });
  r.read("reference", "ramp_duration", [&](const std::string& v) { s.reference.ramp_duration = kv::parse_double(v); });
  r.read("reference", "hold_after", [&](const std::string& v) { s.reference.hold_after = kv::parse_bool(v); });

  r.read("controller", "gain", [&](const std::string& v) {
    const auto g = parse_array<8>(v);
    for (int i = 0; i < 8; ++i) s.gain.k(i / 4, i % 4) = g[static_cast<std::size_t>(i)];
  });
  r.read("controller", "alpha", [&](const std::string& v) { s.obstacle.alpha = kv::parse_double(v); });
  r.read("controller", "filter", [&](const std::string& v) { s.filter = parse_filter_mode(v); });

  r.read("uncertainty", "mode", [&](const std::string& v) { s.uncertainty.mode = parse_uncertainty_mode(v); });
  r.read("uncertainty", "tau", [&](const std::string& v) { s.uncertainty.tau = kv::parse_double(v); });
  r.read("uncertainty", "pole", [&](const std::string& v) { s.uncertainty.pole = kv::parse_double(v); });

  auto& q = c.iqc;
  r.read("iqc", "source", [&](const std::string& v) { q.source = parse_iqc_source(v); });
  r.read("iqc", "filter", [&](const std::string& v) { q.filter = parse_array<4>(v); });
  r.read("iqc", "alpha", [&](const std::string& v) { q.alpha = kv::parse_double(v); });
  r.read("iqc", "lambda", [&](const std::string& v) {
    const auto l = kv::parse_double_list(v);
    if (l.size() == 1) q.lambda = {l[0], l[0]};
    else if (l.size() == 2) q.lambda = {l[0], l[1]};
    else throw ConfigError("expected one or two numbers");
  });
  r.read("iqc", "family", [&](const std::string& v) { q.fit.family.kind = parse_family(v); });
  r.read("iqc", "param_range", [&](const std::string& v) {
    const auto p = parse_vec2(v);
    q.fit.family.param_lo = p(0);
    q.fit.family.param_hi = p(1);
  });
  r.read("iqc", "samples", [&](const std::string& v) { q.fit.family.n_samples = parse_count(v); });
  r.read("iqc", "margin", [&](const std::string& v) { q.fit.margin = kv::parse_double(v); });
  r.read("iqc", "grid", [&](const std::string& v) {
    const auto g = parse_array<3>(v);
    q.fit.omega_min = g[0];
    q.fit.omega_max = g[1];
    if (g[2] < 0.0 || g[2] != static_cast<double>(static_cast<std::size_t>(g[2]))) {
      throw ConfigError("grid point count must be a nonnegative integer");
    }
    q.fit.grid_points = static_cast<std::size_t>(g[2]);
  });

  r.read("numerics", "dt", [&](const std::string& v) { s.dt = kv::parse_double(v); });
  r.read("numerics", "horizon", [&](const std::string& v) { s.horizon = kv::parse_double(v); });
  r.read("numerics", "safety_tolerance", [&](const std::string& v) { c.safety_tolerance = kv::parse_double(v); });

  r.read("output", "dir", [&](const std::string& v) { c.output.dir = v; });
  r.read("output", "prefix", [&](const std::string& v) { c.output.prefix = v; });

  r.reject_unknown();
  validate(c);
  return c;
}

kv::Document to_document(const ScenarioConfig& c) {
  kv::Document d;
  const auto& s = c.sim;
  d.set("plant", "initial_position", format_vec2(s.initial.p));
  d.set("plant", "initial_velocity", format_vec2(s.initial.v));
  d.set("plant", "obstacle_center", format_vec2(s.obstacle.center));
  d.set("plant", "obstacle_radius", kv::format_double(s.obstacle.radius));

  d.set("reference", "start", format_vec2(s.reference.start));
  d.set("reference", "goal", format_vec2(s.reference.goal));
  d.set("reference", "ramp_duration", kv::format_double(s.reference.ramp_duration));
  d.set("reference", "hold_after", s.reference.hold_after ? "true" : "false");

  std::vector<double> gain;
  for (int i = 0; i < 8; ++i) gain.push_back(s.gain.k(i / 4, i % 4));
  d.set("controller", "gain", kv::format_double_list(gain));
  d.set("controller", "alpha", kv::format_double(s.obstacle.alpha));
  d.set("controller", "filter", std::string(to_string(s.filter)));

  d.set("uncertainty", "mode", std::string(to_string(s.uncertainty.mode)));
  d.set("uncertainty", "tau", kv::format_double(s.uncertainty.tau));
  d.set("uncertainty", "pole", kv::format_double(s.uncertainty.pole));

  const auto& q = c.iqc;
  d.set("iqc", "source", std::string(to_string(q.source)));
  d.set("iqc", "filter", format_array(q.filter));
  if (q.alpha) d.set("iqc", "alpha", kv::format_double(*q.alpha));
  d.set("iqc", "lambda", format_array(q.lambda));
  d.set("iqc", "family", std::string(to_string(q.fit.family.kind)));
  d.set("iqc", "param_range", kv::format_double_list({q.fit.family.param_lo, q.fit.family.param_hi}));
  d.set("iqc", "samples", std::to_string(q.fit.family.n_samples));
  d.set("iqc", "margin", kv::format_double(q.fit.margin));
  d.set("iqc", "grid", kv::format_double_list({q.fit.omega_min, q.fit.omega_max,
                                                static_cast<double>(q.fit.grid_points)}));

  d.set("numerics", "dt", kv::format_double(s.dt));
  d.set("numerics", "horizon", kv::format_double(s.horizon));
  d.set("numerics", "safety_tolerance", kv::format_double(c.safety_tolerance));

  d.set("output", "dir", c.output.dir);
  d.set("output", "prefix", c.output.prefix);
  return d;
}

ScenarioConfig parse(std::string_view text, const std::vector<std::string>& overrides) {
  auto doc = kv::Document::parse(text);
  for (const auto& o : overrides) doc.apply_override(o);
  return from_document(doc);
}

ScenarioConfig load(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), overrides);
}

std::string serialize(const ScenarioConfig& config) { return to_document(config).serialize(); }

FitOutcome run_fit(const FitSettings& settings, double alpha) {
  settings.family.validate();
  auto grid = lti::FrequencyGrid::log_spaced(settings.omega_min, settings.omega_max,
                                             settings.grid_points);
  auto envelope = uncertainty::family_envelope(settings.family, alpha, grid);
  uncertainty::FitOptions options;
  options.margin = settings.margin;
  const auto bound = uncertainty::fit_first_order_bound(envelope, grid, options);
  auto iqc = uncertainty::build_iqc(bound.state_space(), alpha, 1.0);
  return FitOutcome{std::move(grid), std::move(envelope), bound, std::move(iqc)};
}

std::vector<uncertainty::IqcSpec> resolve_iqc(const ScenarioConfig& config) {
  const auto& q = config.iqc;
  const double alpha = config.iqc_alpha();
  std::vector<uncertainty::IqcSpec> out;
  switch (q.source) {
    case IqcSource::kNone:
      return out;
    case IqcSource::kFilter: {
      const auto f = lti::StateSpace::first_order(q.filter[0], q.filter[1], q.filter[2], q.filter[3]);
      for (double l : q.lambda) out.push_back({f, alpha, l});
      break;
    }
    case IqcSource::kFit: {
      const auto fit = run_fit(q.fit, alpha);
      for (double l : q.lambda) out.push_back({fit.iqc.filter, alpha, l});
      break;
    }
  }
  for (const auto& spec : out) spec.validate();
  return out;
}

sim::SimConfig resolve(const ScenarioConfig& config) {
  sim::SimConfig s = config.sim;
  s.iqc = resolve_iqc(config);
  return s;
}

}  // namespace rcbf::scenario
