#include <map>

#include "doctest.h"

#include "gridgate/lf_validation.hpp"
#include "support/fixtures.hpp"

using namespace gridgate;
using namespace gridgate::testing;

namespace {

NormalizedCurve flat_curve(double value, int steps) {
  NormalizedCurve c;
  c.dt_hours = 24.0 / steps;
  c.values.assign(steps, value);
  return c;
}

}  // namespace

TEST_CASE("synthesize_injections") {
  const Grid g = make_case58();
  SUBCASE("no PV: peak P equals the nominal power") {
    const auto prof = synthesize_injections(g, builtin_load_curve(), builtin_pv_curve(), {});
    const PerUnitGrid pu = to_per_unit(g, 630.0);
    double peak = 0.0;
    int peak_t = -1;
    for (int t = 0; t < prof.n_step(); ++t)
      if (prof.p_kw.col(t).sum() > peak) {
        peak = prof.p_kw.col(t).sum();
        peak_t = t;
      }
    CHECK(peak == doctest::Approx(319.0));
    CHECK(prof.p_kw(pu.bus_of("F5N1"), peak_t) == doctest::Approx(28.0));
    // q from the 0.9 power factor
    CHECK(prof.q_kvar(pu.bus_of("F5N1"), peak_t) ==
          doctest::Approx(28.0 * std::tan(std::acos(0.9))));
    // junction rows stay zero
    CHECK(prof.p_kw(pu.bus_of("F1N1"), peak_t) == 0.0);
  }
  SUBCASE("PV export: 5 kWp against 2 kW of load at full sun") {
    Grid tiny = make_toy_feeder(1, {{1, 5.0}});
    // load 0.4 of nominal (2 kW), PV shape 1.0
    const auto prof = synthesize_injections(tiny, flat_curve(0.4, 8), flat_curve(1.0, 8),
                                            {{"N1", 5.0}});
    const PerUnitGrid pu = to_per_unit(tiny, 100.0);
    CHECK(prof.p_kw(pu.bus_of("N1"), 0) == doctest::Approx(2.0 - 5.0));
    // reactive power follows the load only; PV runs at unity power factor
    CHECK(prof.q_kvar(pu.bus_of("N1"), 0) == doctest::Approx(2.0 * std::tan(std::acos(0.9))));
  }
  SUBCASE("mismatched curves are rejected") {
    CHECK_THROWS_AS(synthesize_injections(g, flat_curve(1, 10), flat_curve(1, 12), {}),
                    CurveMismatch);
  }
}

TEST_CASE("detect_anomalies on a synthetic result") {
  const Grid g = make_minimal_grid();
  const NetworkModel net = build_network(to_per_unit(g, 160.0));
  LimitSet limits;

  LoadFlowResult res;
  res.v.resize(2, 1);
  res.i_branch.resize(1, 1);
  res.slack_s.resize(1);
  res.converged = {1};
  res.iterations = {3};
  res.slack_s(0) = Complex(0.05, 0.01);
  const int n2 = net.pu.bus_of("N2");
  const int n1 = net.pu.bus_of("N1");

  SUBCASE("|V| = 1.12 pu on an LV node") {
    res.v(n1, 0) = Complex(1.0, 0.0);
    res.v(n2, 0) = Complex(1.12, 0.0);
    res.i_branch(0, 0) = Complex(0.1, 0.0);
    const auto f = detect_anomalies(res, g, net, limits);
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_id == "v-out-of-band");
    CHECK(f[0].entity == EntityRef{"node", "N2"});
    CHECK(*f[0].measured == doctest::Approx(1.12));
    CHECK(*f[0].threshold == doctest::Approx(1.10));
  }
  SUBCASE("|V| = 0.95 pu is inside the LV band") {
    res.v(n1, 0) = Complex(1.0, 0.0);
    res.v(n2, 0) = Complex(0.95, 0.0);
    res.i_branch(0, 0) = Complex(0.1, 0.0);
    CHECK(detect_anomalies(res, g, net, limits).empty());
  }
  SUBCASE("5% overcurrent on one line at one step") {
    res.v(n1, 0) = Complex(1.0, 0.0);
    res.v(n2, 0) = Complex(0.98, 0.0);
    res.i_branch(0, 0) = Complex(*net.branches[0].ampacity_pu * 1.05, 0.0);
    const auto f = detect_anomalies(res, g, net, limits);
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_id == "line-overcurrent");
    CHECK(f[0].entity == EntityRef{"line", "L1"});
  }
  SUBCASE("non-converged step is a finding") {
    res.v.col(0).setConstant(Complex(1.0, 0.0));
    res.i_branch(0, 0) = Complex(0, 0);
    res.converged = {0};
    const auto f = detect_anomalies(res, g, net, limits);
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_id == "lf-nonconvergence");
  }
}

TEST_CASE("detect_anomalies coalesces per entity, verbose keeps steps") {
  const Grid g = make_minimal_grid();
  const NetworkModel net = build_network(to_per_unit(g, 160.0));
  LimitSet limits;
  LoadFlowResult res;
  res.v.resize(2, 3);
  res.i_branch.setZero(1, 3);
  res.slack_s.setZero(3);
  res.converged = {1, 1, 1};
  res.iterations = {2, 2, 2};
  const int n2 = net.pu.bus_of("N2");
  res.v.setConstant(Complex(1.0, 0.0));
  res.v(n2, 0) = Complex(1.12, 0.0);
  res.v(n2, 1) = Complex(1.15, 0.0);
  res.v(n2, 2) = Complex(1.11, 0.0);

  const auto coalesced = detect_anomalies(res, g, net, limits, false);
  REQUIRE(coalesced.size() == 1);
  CHECK(*coalesced[0].measured == doctest::Approx(1.15));  // worst step reported

  const auto verbose = detect_anomalies(res, g, net, limits, true);
  CHECK(verbose.size() == 3);
}

TEST_CASE("gcp overcurrent uses the transformer rating") {
  Grid g = make_case58();
  const NetworkModel net = build_network(to_per_unit(g, 630.0));
  LimitSet limits;
  const int t_count = 1;
  LoadFlowResult res;
  res.v.setConstant(net.n_bus(), t_count, Complex(1.0, 0.0));
  res.i_branch.setZero(net.n_branch(), t_count);
  res.slack_s.setZero(t_count);
  res.converged = {1};
  res.iterations = {1};
  // transformer branch is the last one
  const int tr = net.n_branch() - 1;
  REQUIRE(net.branches[tr].is_transformer);
  res.i_branch(tr, 0) = Complex(1.08, 0.0);  // rating is 1.0 pu at s_base = rated_s
  const auto f = detect_anomalies(res, g, net, limits);
  REQUIRE(f.size() == 1);
  CHECK(f[0].rule_id == "gcp-overcurrent");
  CHECK(f[0].entity.kind == "transformer");
}

TEST_CASE("run_advanced_validation") {
  SUBCASE("clean case-study fixture has zero findings") {
    const Grid g = make_case58();
    CHECK(run_advanced_validation(g, default_advanced_config(g)).empty());
  }
  SUBCASE("refuses when basic validation has errors") {
    Grid g = make_case58();
    g.lines[4].length.reset();
    CHECK_THROWS_AS(run_advanced_validation(g, default_advanced_config(g)),
                    PrerequisiteFailed);
  }
  SUBCASE("corrupted trunk impedance is flagged downstream") {
    Grid g = make_case58();
    // multiply r of the feeder-2 head line kind by 100 via a dedicated kind
    LineKind bad = *g.find_line_kind("cu-95");
    bad.name = "cu-95-corrupt";
    *bad.r_per_km *= 100.0;
    g.line_kinds.push_back(bad);
    for (auto& l : g.lines)
      if (l.id == "L21") l.kind = "cu-95-corrupt";
    const auto f = run_advanced_validation(g, default_advanced_config(g));
    REQUIRE(!f.empty());
    bool downstream = false;
    for (const auto& x : f)
      if (x.rule_id == "v-out-of-band" && x.entity.id.starts_with("F2")) downstream = true;
    CHECK(downstream);
  }
  SUBCASE("islanded in-service node surfaces as a finding") {
    Grid g = make_case58();
    g.nodes.push_back({"ORPHAN", NodeKind::service_entry, Gps{46.231, 7.361},
                       VoltageLevel::lv, 4.0, 0.4});
    const auto f = run_advanced_validation(g, default_advanced_config(g));
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_id == "lf-nonconvergence");
  }
}

TEST_CASE("monotonicity: heavier loading never clears a voltage finding") {
  Grid g = make_case58();
  // weaken one feeder so findings exist at factor 1
  LineKind bad = *g.find_line_kind("cu-16");
  bad.name = "cu-16-bad";
  *bad.r_per_km *= 12.0;
  g.line_kinds.push_back(bad);
  for (auto& l : g.lines)
    if (l.id == "L76" || l.id == "L77") l.kind = "cu-16-bad";

  auto entities_with_v_finding = [](const Grid& grid, double scale) {
    Grid scaled = grid;
    for (auto& n : scaled.nodes) n.nominal_power *= scale;
    AdvancedConfig cfg = default_advanced_config(scaled);
    std::vector<std::string> out;
    for (const auto& f : run_advanced_validation(scaled, cfg))
      if (f.rule_id == "v-out-of-band") out.push_back(f.entity.id);
    return out;
  };

  const auto base = entities_with_v_finding(g, 1.0);
  REQUIRE(!base.empty());
  for (double scale : {1.1, 1.25}) {
    const auto heavier = entities_with_v_finding(g, scale);
    for (const auto& id : base)
      CHECK(std::find(heavier.begin(), heavier.end(), id) != heavier.end());
  }
}
