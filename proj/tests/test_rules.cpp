#include "doctest.h"

#include "gridgate/rules.hpp"
#include "support/fixtures.hpp"

using namespace gridgate;
using gridgate::testing::make_case58;
using gridgate::testing::make_minimal_grid;

namespace {

Grid triangle() {
  Grid g;
  g.slack_node = "A";
  g.service_area_bbox = {45.8, 47.8, 5.9, 10.5};
  for (const char* id : {"A", "B", "C"})
    g.nodes.push_back({id, NodeKind::cabinet, Gps{46.2, 7.4}, VoltageLevel::lv, 0.0, 0.4});
  g.line_kinds.push_back({"k", 0.6, 0.08, 0.0, 160.0, 50.0, Construction::buried});
  g.lines.push_back({"L1", "A", "B", 0.02, "k", true});
  g.lines.push_back({"L2", "B", "C", 0.02, "k", true});
  g.lines.push_back({"L3", "C", "A", 0.02, "k", true});
  return g;
}

}  // namespace

TEST_CASE("radiality: radial case-study tree produces no findings") {
  CHECK(check_radiality(make_case58()).empty());
}

TEST_CASE("radiality: a triangle is one mesh") {
  const auto f = check_radiality(triangle());
  REQUIRE(f.size() == 1);
  CHECK(f[0].rule_id == "meshed-topology");
  CHECK(f[0].entity.kind == "line");
  CHECK(f[0].severity == Severity::error);
}

TEST_CASE("radiality: an open switch breaks the mesh") {
  Grid g = triangle();
  g.lines[2].in_service = false;
  CHECK(check_radiality(g).empty());
}

TEST_CASE("radiality: cycle count follows |E| - |V| + components") {
  Grid g = triangle();
  // add a second, disjoint triangle
  for (const char* id : {"D", "E", "F"})
    g.nodes.push_back({id, NodeKind::cabinet, Gps{46.3, 7.5}, VoltageLevel::lv, 0.0, 0.4});
  g.lines.push_back({"M1", "D", "E", 0.02, "k", true});
  g.lines.push_back({"M2", "E", "F", 0.02, "k", true});
  g.lines.push_back({"M3", "F", "D", 0.02, "k", true});
  CHECK(check_radiality(g).size() == 2);
}

TEST_CASE("gps bounds") {
  Grid g = make_minimal_grid();
  const RuleConfig cfg = RuleConfig::defaults_for(g);
  CHECK(check_gps_bounds(g, cfg).empty());

  SUBCASE("node at (0,0) with Swiss bbox") {
    g.nodes[1].gps = Gps{0.0, 0.0};
    const auto f = check_gps_bounds(g, cfg);
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_id == "gps-out-of-area");
    CHECK(f[0].entity.id == "N2");
  }
  SUBCASE("node exactly on the bbox edge is inside") {
    g.nodes[1].gps = Gps{45.8, 7.0};
    CHECK(check_gps_bounds(g, cfg).empty());
  }
}

TEST_CASE("length vs manhattan distance") {
  Grid g = make_minimal_grid();
  RuleConfig cfg = RuleConfig::defaults_for(g);
  // endpoints ~100 m apart (0.0009 deg of latitude is ~100.1 m)
  g.nodes[0].gps = Gps{46.2000, 7.4};
  g.nodes[1].gps = Gps{46.2009, 7.4};

  SUBCASE("1.0 km cable over a 100 m Manhattan distance is flagged") {
    g.lines[0].length = 1.0;
    const auto f = check_length_vs_manhattan(g, cfg);
    REQUIRE(f.size() == 1);
    CHECK(f[0].severity == Severity::warning);
    CHECK(*f[0].measured == doctest::Approx(1000.0));
    CHECK(*f[0].threshold == doctest::Approx(1.5 * 100.0755).epsilon(1e-3));
  }
  SUBCASE("120 m cable is fine") {
    g.lines[0].length = 0.12;
    CHECK(check_length_vs_manhattan(g, cfg).empty());
  }
  SUBCASE("co-located endpoints fall under the 25 m floor") {
    g.nodes[1].gps = g.nodes[0].gps;
    g.lines[0].length = 0.030;
    CHECK(check_length_vs_manhattan(g, cfg).empty());  // threshold 1.5 * 25 = 37.5 m
    g.lines[0].length = 0.040;
    CHECK(check_length_vs_manhattan(g, cfg).size() == 1);
  }
}

TEST_CASE("sections in and out of range") {
  Grid g = make_minimal_grid();
  RuleConfig cfg = RuleConfig::defaults_for(g);
  g.line_kinds[0].section = 150.0;
  CHECK(check_sections(g, cfg).empty());
  g.line_kinds[0].section = 2.5;
  CHECK(check_sections(g, cfg).size() == 1);
  g.line_kinds[0].section = 1000.0;
  const auto f = check_sections(g, cfg);
  REQUIRE(f.size() == 1);
  CHECK(f[0].entity.kind == "line");
  CHECK(*f[0].measured == doctest::Approx(1000.0));
}

TEST_CASE("missing attributes") {
  SUBCASE("complete grid is clean") {
    CHECK(check_missing_attributes(make_case58()).empty());
  }
  SUBCASE("line without length") {
    Grid g = make_minimal_grid();
    g.lines[0].length.reset();
    const auto f = check_missing_attributes(g);
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_id == "missing-length");
    CHECK(f[0].entity == EntityRef{"line", "L1"});
    CHECK(f[0].severity == Severity::error);
  }
  SUBCASE("fuse without rating") {
    Grid g = make_minimal_grid();
    g.devices.push_back(
        {"F1", DeviceKind::fuse, "N1", std::string("L1"), SwitchState::closed, std::nullopt});
    const auto f = check_missing_attributes(g);
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_id == "missing-rating");
    CHECK(f[0].entity == EntityRef{"device", "F1"});
  }
  SUBCASE("transformer without rating, kind without parameters, node without gps") {
    Grid g = make_case58();
    g.transformer->rated_s.reset();
    g.line_kinds[1].x_per_km.reset();
    g.nodes[3].gps.reset();
    const auto f = check_missing_attributes(g);
    REQUIRE(f.size() == 3);
    bool saw_tr = false, saw_kind = false, saw_gps = false;
    for (const auto& x : f) {
      saw_tr |= x.rule_id == "missing-rated-s";
      saw_kind |= x.rule_id == "missing-kind-params";
      saw_gps |= x.rule_id == "missing-gps";
    }
    CHECK(saw_tr);
    CHECK(saw_kind);
    CHECK(saw_gps);
  }
}

TEST_CASE("parallel fuses") {
  Grid g = make_case58();
  SUBCASE("one fuse per feeder head is fine") {
    CHECK(check_parallel_fuses(g).empty());
  }
  SUBCASE("two closed fuses on the same line at the same node") {
    g.devices.push_back(
        {"FUSE-DUP", DeviceKind::fuse, "B00", std::string("L11"), SwitchState::closed, 200.0});
    const auto f = check_parallel_fuses(g);
    REQUIRE(f.size() == 1);
    CHECK(f[0].rule_id == "parallel-fuses");
    CHECK(f[0].entity == EntityRef{"node", "B00"});
    CHECK(f[0].severity == Severity::error);
  }
  SUBCASE("an open duplicate does not conflict") {
    g.devices.push_back(
        {"FUSE-DUP", DeviceKind::fuse, "B00", std::string("L11"), SwitchState::open, 200.0});
    CHECK(check_parallel_fuses(g).empty());
  }
}

TEST_CASE("run_basic_validation: clean fixture, determinism, aggregation") {
  const Grid clean = make_case58();
  const RuleConfig cfg = RuleConfig::defaults_for(clean);
  CHECK(run_basic_validation(clean, cfg).empty());

  Grid bad = clean;
  bad.lines[3].length = 5.0;  // way above the Manhattan distance
  bad.devices[1].rating.reset();
  const auto f1 = run_basic_validation(bad, cfg);
  CHECK(f1.size() == 2);
  const auto f2 = run_basic_validation(bad, cfg);
  CHECK(f1 == f2);
}

TEST_CASE("injection property: one mutation, one finding with matching entity") {
  std::mt19937 rng(20240817);
  const Grid clean = make_case58();
  const RuleConfig cfg = RuleConfig::defaults_for(clean);
  for (int trial = 0; trial < 60; ++trial) {
    Grid g = clean;
    std::uniform_int_distribution<int> rule_pick(0, 3);
    std::uniform_int_distribution<size_t> line_pick(0, g.lines.size() - 1);
    std::uniform_int_distribution<size_t> node_pick(0, g.nodes.size() - 1);
    std::string expect_rule;
    EntityRef expect_entity;
    switch (rule_pick(rng)) {
      case 0: {
        const size_t i = line_pick(rng);
        g.lines[i].length = 9.9;
        expect_rule = "length-vs-distance";
        expect_entity = {"line", g.lines[i].id};
        break;
      }
      case 1: {
        const size_t i = node_pick(rng);
        g.nodes[i].gps = Gps{40.0, 3.0};
        expect_rule = "gps-out-of-area";
        expect_entity = {"node", g.nodes[i].id};
        break;
      }
      case 2: {
        const size_t i = line_pick(rng);
        g.lines[i].length.reset();
        expect_rule = "missing-length";
        expect_entity = {"line", g.lines[i].id};
        break;
      }
      default: {
        const size_t i = node_pick(rng);
        g.nodes[i].gps.reset();
        expect_rule = "missing-gps";
        expect_entity = {"node", g.nodes[i].id};
        break;
      }
    }
    const auto findings = run_basic_validation(g, cfg);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].rule_id == expect_rule);
    CHECK(findings[0].entity == expect_entity);
    // every emitted rule id belongs to the registered set and the entity
    // resolves in the grid
    const auto& registry = registered_rule_ids();
    CHECK(std::find(registry.begin(), registry.end(), findings[0].rule_id) != registry.end());
    if (findings[0].entity.kind == "node") CHECK(g.find_node(findings[0].entity.id));
    if (findings[0].entity.kind == "line") CHECK(g.find_line(findings[0].entity.id));
  }
}

TEST_CASE("rule config invariants are enforced") {
  const Grid g = make_minimal_grid();
  RuleConfig cfg = RuleConfig::defaults_for(g);
  cfg.length_ratio_kappa = 1.0;
  CHECK_THROWS_AS(run_basic_validation(g, cfg), std::invalid_argument);
  cfg = RuleConfig::defaults_for(g);
  cfg.section_min = 500.0;
  CHECK_THROWS_AS(run_basic_validation(g, cfg), std::invalid_argument);
}
