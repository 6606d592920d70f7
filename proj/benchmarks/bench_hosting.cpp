#include <benchmark/benchmark.h>

#include "gridgate/hosting.hpp"
#include "support/fixtures.hpp"

using namespace gridgate;

namespace {

HostingConfig fixture_config(double lambda) {
  HostingConfig hc;
  hc.load_curve = builtin_load_curve();
  hc.pv_curve = builtin_pv_curve();
  hc.lambda = lambda;
  return hc;
}

}  // namespace

static void BM_SensitivityStep(benchmark::State& state) {
  const Grid g = testing::make_case58();
  const NetworkModel net = build_network(to_per_unit(g, 630.0));
  const InjectionProfile prof =
      synthesize_injections(g, builtin_load_curve(), builtin_pv_curve(), {});
  const LoadFlowResult base = multi_period_loadflow(net, prof);
  for (auto _ : state) {
    SensitivitySet sens = compute_sensitivities(net, base.v.col(72), 72);
    benchmark::DoNotOptimize(sens.dv_dp);
  }
}
BENCHMARK(BM_SensitivityStep);

static void BM_BuildHostingProblem(benchmark::State& state) {
  const Grid g = testing::make_case58();
  const HostingConfig hc = fixture_config(0.0);
  for (auto _ : state) {
    HostingProblem prob = build_hosting_problem(g, hc);
    benchmark::DoNotOptimize(prob.a);
  }
}
BENCHMARK(BM_BuildHostingProblem)->Unit(benchmark::kMillisecond);

static void BM_SolveHosting(benchmark::State& state) {
  const Grid g = testing::make_case58();
  HostingProblem prob = build_hosting_problem(g, fixture_config(0.0));
  prob.lambda = static_cast<double>(state.range(0));
  for (auto _ : state) {
    HostingSolution sol = solve_hosting(prob);
    benchmark::DoNotOptimize(sol.alpha_kwp);
  }
}
BENCHMARK(BM_SolveHosting)->Arg(0)->Arg(100)->Arg(1000000)->Unit(benchmark::kMillisecond);

static void BM_FullSweep(benchmark::State& state) {
  const Grid g = testing::make_case58();
  const HostingProblem prob = build_hosting_problem(g, fixture_config(0.0));
  for (auto _ : state) {
    auto rows = sweep_lambda(prob, default_lambda_grid());
    benchmark::DoNotOptimize(rows);
  }
}
BENCHMARK(BM_FullSweep)->Unit(benchmark::kMillisecond);
