#include <benchmark/benchmark.h>

#include "gridgate/lf_validation.hpp"
#include "gridgate/loadflow.hpp"
#include "support/fixtures.hpp"

using namespace gridgate;

static void BM_BuildNetwork(benchmark::State& state) {
  const Grid g = testing::make_case58();
  const PerUnitGrid pu = to_per_unit(g, 630.0);
  for (auto _ : state) {
    NetworkModel net = build_network(pu);
    benchmark::DoNotOptimize(net.y_bus);
  }
}
BENCHMARK(BM_BuildNetwork);

static void BM_NewtonSingleStep(benchmark::State& state) {
  const Grid g = testing::make_case58();
  const NetworkModel net = build_network(to_per_unit(g, 630.0));
  Eigen::VectorXcd s_inj = Eigen::VectorXcd::Zero(net.n_bus());
  const double tan_phi = std::tan(std::acos(0.9));
  for (const auto& n : g.nodes)
    s_inj(net.pu.bus_of(n.id)) = -Complex(n.nominal_power, n.nominal_power * tan_phi) / 630.0;
  for (auto _ : state) {
    StepSolution sol = solve_loadflow(net.y_bus, net.pu.slack_bus, {1.0, 0.0}, s_inj);
    benchmark::DoNotOptimize(sol.v);
  }
}
BENCHMARK(BM_NewtonSingleStep);

static void BM_MultiPeriodDay(benchmark::State& state) {
  const Grid g = testing::make_case58();
  const NetworkModel net = build_network(to_per_unit(g, 630.0));
  const InjectionProfile prof =
      synthesize_injections(g, builtin_load_curve(), builtin_pv_curve(), {});
  for (auto _ : state) {
    LoadFlowResult res = multi_period_loadflow(net, prof);
    benchmark::DoNotOptimize(res.slack_s);
  }
}
BENCHMARK(BM_MultiPeriodDay)->Unit(benchmark::kMillisecond);

static void BM_AdvancedValidation(benchmark::State& state) {
  const Grid g = testing::make_case58();
  const AdvancedConfig cfg = default_advanced_config(g);
  for (auto _ : state) {
    auto findings = run_advanced_validation(g, cfg);
    benchmark::DoNotOptimize(findings);
  }
}
BENCHMARK(BM_AdvancedValidation)->Unit(benchmark::kMillisecond);
