#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "rcbf/error.hpp"
#include "rcbf/keyvalue.hpp"
#include "rcbf/scenario.hpp"

using namespace rcbf;
using namespace rcbf::scenario;

namespace {

std::string cfg_path(const std::string& name) { return std::string(RCBF_CONFIG_DIR) + "/" + name; }

const char* kBundled[] = {"nominal.cfg", "delay_nominal.cfg", "delay_robust.cfg",
                          "delay_robust_fitted.cfg"};

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(KeyValue, ParseAndSerialize) {
  const auto d = kv::Document::parse(
      "# comment\ntop = 1\n[a]\nx = 1.5 ; trailing\n  y=hello world \n\n[b]\nz = 1, 2\n");
  EXPECT_EQ(d.get("", "top"), "1");
  EXPECT_EQ(d.get("a", "x"), "1.5");
  EXPECT_EQ(d.get("a", "y"), "hello world");
  EXPECT_EQ(d.get("b", "z"), "1, 2");
  EXPECT_FALSE(d.has("a", "z"));
  EXPECT_EQ(kv::Document::parse(d.serialize()).sections(), d.sections());
  EXPECT_THROW(kv::Document::parse("[a]\nx=1\nx=2\n"), ConfigError);
  EXPECT_THROW(kv::Document::parse("[a\nx=1\n"), ConfigError);
  EXPECT_THROW(kv::Document::parse("[a]\njunk\n"), ConfigError);
}

TEST(KeyValue, Overrides) {
  auto d = kv::Document::parse("[a]\nx = 1\n");
  d.apply_override("a.x=2");
  d.apply_override("b.y = 3");
  EXPECT_EQ(d.get("a", "x"), "2");
  EXPECT_EQ(d.get("b", "y"), "3");
  EXPECT_THROW(d.apply_override("noequals"), ConfigError);
  EXPECT_THROW(d.apply_override("nodot=1"), ConfigError);
}

TEST(KeyValue, Numbers) {
  for (double v : {0.1, 1e-3, -16.98, 1.0 / 3.0, 6.02e23, 0.0}) {
    EXPECT_EQ(kv::parse_double(kv::format_double(v)), v);
  }
  EXPECT_EQ(kv::format_double(0.13), "0.13");
  EXPECT_THROW(kv::parse_double("1.5x"), ConfigError);
  EXPECT_THROW(kv::parse_double(""), ConfigError);
  EXPECT_EQ(kv::parse_int("42"), 42);
  EXPECT_THROW(kv::parse_int("4.2"), ConfigError);
  EXPECT_TRUE(kv::parse_bool("true"));
  EXPECT_FALSE(kv::parse_bool("false"));
  EXPECT_THROW(kv::parse_bool("maybe"), ConfigError);
  const auto list = kv::parse_double_list(" 1, -2.5 ,3e2");
  ASSERT_EQ(list.size(), 3u);
  EXPECT_EQ(list[2], 300.0);
  EXPECT_EQ(kv::format_double_list({1, -2.5}), "1, -2.5");
}

TEST(Scenario, BundledConfigsValidate) {
  for (const char* name : kBundled) {
    const auto cfg = load(cfg_path(name));
    EXPECT_NO_THROW(resolve(cfg).validate()) << name;
  }
  const auto robust = load(cfg_path("delay_robust.cfg"));
  EXPECT_EQ(robust.sim.filter, sim::FilterMode::kRobustEcbf);
  EXPECT_EQ(robust.iqc.source, IqcSource::kFilter);
  EXPECT_EQ(robust.sim.uncertainty.tau, 0.13);
  const auto specs = resolve_iqc(robust);
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0].filter.a()(0, 0), -16.98);
  EXPECT_EQ(specs[1].lambda, 0.1);
  EXPECT_EQ(specs[0].alpha, 5.0);
}

TEST(Scenario, RoundTripIsSemanticallyIdentical) {
  for (const char* name : kBundled) {
    const auto a = load(cfg_path(name));
    const auto text = serialize(a);
    const auto b = parse(text);
    EXPECT_EQ(serialize(b), text) << name;
    EXPECT_EQ(to_document(b).sections(), to_document(a).sections()) << name;
  }
}

TEST(Scenario, DefaultsFillMissingKeys) {
  const auto cfg = parse("[controller]\nfilter = ecbf\n");
  EXPECT_EQ(cfg.sim.dt, 1e-3);
  EXPECT_EQ(cfg.sim.horizon, 60.0);
  EXPECT_EQ(cfg.sim.obstacle.radius, 1.5);
  EXPECT_EQ(cfg.sim.obstacle.center, Eigen::Vector2d(2.0, -0.2));
  EXPECT_EQ(cfg.sim.gain.k(0, 2), 1.94);
  EXPECT_EQ(cfg.iqc.source, IqcSource::kNone);
  EXPECT_EQ(cfg.iqc_alpha(), 5.0);
}

TEST(Scenario, RejectsUnknownKeysWithFieldNames) {
  EXPECT_NE(config_error("[plant]\nmass = 3\n").find("plant.mass"), std::string::npos);
  EXPECT_NE(config_error("[bogus]\nx = 1\n").find("bogus"), std::string::npos);
  EXPECT_NE(config_error("[numerics]\ndt = -1\n").find("numerics.dt"), std::string::npos);
  EXPECT_NE(config_error("[controller]\nfilter = magic\n").find("controller.filter"),
            std::string::npos);
  EXPECT_NE(config_error("[controller]\ngain = 1, 2\n").find("controller.gain"),
            std::string::npos);
  EXPECT_NE(config_error("[iqc]\nlambda = 0\n").find("iqc.lambda"), std::string::npos);
  EXPECT_NE(config_error("[plant]\nobstacle_radius = 0\n").find("plant.obstacle_radius"),
            std::string::npos);
  EXPECT_FALSE(config_error("[controller]\nfilter = robust-ecbf\n").empty());
}

TEST(Scenario, OverridesApplyBeforeValidation) {
  const auto cfg = load(cfg_path("nominal.cfg"), {"uncertainty.mode=delay", "uncertainty.tau=0.05",
                                                  "numerics.dt=0.002"});
  EXPECT_EQ(cfg.sim.uncertainty.mode, sim::UncertaintyMode::kDelay);
  EXPECT_EQ(cfg.sim.uncertainty.tau, 0.05);
  EXPECT_EQ(cfg.sim.dt, 0.002);
  EXPECT_THROW(load(cfg_path("nominal.cfg"), {"plant.nope=1"}), ConfigError);
  EXPECT_THROW(load(cfg_path("does_not_exist.cfg")), ConfigError);
}

TEST(Scenario, LambdaScalarAppliesToBothChannels) {
  const auto cfg = parse("[controller]\nfilter = robust-ecbf\n[iqc]\nsource = filter\nlambda = 0.3\n");
  EXPECT_EQ(cfg.iqc.lambda[0], 0.3);
  EXPECT_EQ(cfg.iqc.lambda[1], 0.3);
}

TEST(Scenario, FitSourceProducesShiftedFilter) {
  const auto cfg = load(cfg_path("delay_robust_fitted.cfg"));
  EXPECT_EQ(cfg.iqc.source, IqcSource::kFit);
  const auto fit = run_fit(cfg.iqc.fit, cfg.iqc_alpha());
  EXPECT_GE(fit.bound.b1, 2.38402);
  EXPECT_GE(fit.bound.dc_gain(), 0.38402);
  const auto specs = resolve_iqc(cfg);
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_NEAR(specs[0].filter.a()(0, 0), -fit.bound.a0 - 2.5, 1e-12);
  EXPECT_EQ(specs[0].filter.d()(0, 0), fit.bound.b1);
}

TEST(Scenario, EnumNames) {
  EXPECT_EQ(to_string(sim::FilterMode::kRobustEcbf), "robust-ecbf");
  EXPECT_EQ(to_string(sim::UncertaintyMode::kActuator), "actuator");
  EXPECT_EQ(to_string(IqcSource::kFit), "fit");
  EXPECT_EQ(to_string(uncertainty::FamilyKind::kDelayRange), "delay");
}
