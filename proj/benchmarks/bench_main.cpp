#include <random>

#include <benchmark/benchmark.h>

#include "rcbf/qcqp.hpp"
#include "rcbf/scenario.hpp"
#include "rcbf/sim.hpp"
#include "rcbf/uncertainty.hpp"

using namespace rcbf;

static void BM_ProjectQuadratic(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-3, 3), q(0.1, 2);
  std::vector<std::pair<Eigen::VectorXd, robust::QuadraticConstraint>> cases;
  for (int i = 0; i < 256; ++i) {
    robust::QuadraticConstraint qc{Eigen::Vector2d(q(rng), q(rng)), Eigen::Vector2d(d(rng), d(rng)),
                                   Eigen::Vector2d(d(rng), d(rng)), d(rng), 0.0};
    qc.rhs = qcqp::constraint_peak(qc, Eigen::Vector2d::Zero()).value - 1.0;
    cases.emplace_back(Eigen::Vector2d(d(rng), d(rng)), qc);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [u0, qc] = cases[i++ % cases.size()];
    benchmark::DoNotOptimize(qcqp::project_quadratic(u0, qc));
  }
}
BENCHMARK(BM_ProjectQuadratic);

static void BM_ProjectHalfspace(benchmark::State& state) {
  const Eigen::VectorXd u0 = Eigen::Vector2d(0.3, -0.1), lin = Eigen::Vector2d(1.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(qcqp::project_halfspace(u0, lin, 4.0));
}
BENCHMARK(BM_ProjectHalfspace);

static void BM_FitDelayFamily(benchmark::State& state) {
  const scenario::FitSettings settings;
  for (auto _ : state) benchmark::DoNotOptimize(scenario::run_fit(settings, 5.0));
}
BENCHMARK(BM_FitDelayFamily)->Unit(benchmark::kMillisecond);

static void BM_ClosedLoop(benchmark::State& state) {
  sim::SimConfig cfg;
  cfg.uncertainty = {sim::UncertaintyMode::kDelay, 0.13, 10};
  if (state.range(0) == 1) {
    cfg.filter = sim::FilterMode::kRobustEcbf;
    const auto f = lti::StateSpace::first_order(-16.98, 6.20, -5.70, 2.84);
    cfg.iqc = {uncertainty::IqcSpec{f, 5.0, 0.1}, uncertainty::IqcSpec{f, 5.0, 0.1}};
  }
  for (auto _ : state) benchmark::DoNotOptimize(sim::run_closed_loop(cfg));
}
BENCHMARK(BM_ClosedLoop)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
