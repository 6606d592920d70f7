#include "fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

namespace gridgate::testing {

namespace {

constexpr double kMetersPerDegLat = 111195.0;

Gps offset(const Gps& base, double north_m, double east_m) {
  const double m_per_deg_lon = kMetersPerDegLat * std::cos(base.lat * std::numbers::pi / 180.0);
  return {base.lat + north_m / kMetersPerDegLat, base.lon + east_m / m_per_deg_lon};
}

}  // namespace

Grid make_minimal_grid() {
  Grid g;
  g.nodes.push_back({"N1", NodeKind::substation, Gps{46.23, 7.36}, VoltageLevel::lv, 0.0, 0.4});
  g.nodes.push_back(
      {"N2", NodeKind::service_entry, offset({46.23, 7.36}, 80.0, 0.0), VoltageLevel::lv, 10.0,
       0.4});
  g.line_kinds.push_back({"cu-50", 0.641, 0.085, 0.0, 165.0, 50.0, Construction::buried});
  g.lines.push_back({"L1", "N1", "N2", 0.09, "cu-50", true});
  g.slack_node = "N1";
  g.service_area_bbox = {45.8, 47.8, 5.9, 10.5};
  return g;
}

Grid make_case58() {
  Grid g;
  g.service_area_bbox = {45.8, 47.8, 5.9, 10.5};
  g.slack_node = "MV";

  const Gps center{46.2300, 7.3600};
  g.nodes.push_back({"MV", NodeKind::substation, center, VoltageLevel::mv, 0.0, 20.0});
  g.nodes.push_back({"B00", NodeKind::substation, center, VoltageLevel::lv, 0.0, 0.4});

  g.line_kinds.push_back({"cu-95", 0.320, 0.082, 0.0, 240.0, 95.0, Construction::buried});
  g.line_kinds.push_back({"cu-50", 0.641, 0.085, 0.0, 165.0, 50.0, Construction::buried});
  g.line_kinds.push_back({"cu-16", 1.150, 0.090, 0.0, 100.0, 16.0, Construction::buried});

  // Nominal powers per (feeder, depth); 19 load nodes, 319 kW total.
  const std::map<std::pair<int, int>, double> loads = {
      {{1, 2}, 22}, {{1, 5}, 18}, {{1, 8}, 12}, {{2, 3}, 25}, {{2, 6}, 15},
      {{3, 2}, 20}, {{3, 5}, 16}, {{3, 8}, 10}, {{4, 4}, 24}, {{4, 8}, 12},
      {{5, 1}, 28}, {{5, 5}, 14}, {{5, 7}, 11}, {{6, 3}, 21}, {{6, 8}, 13},
      {{7, 2}, 19}, {{7, 4}, 15}, {{7, 6}, 12}, {{7, 8}, 12}};

  for (int f = 1; f <= 7; ++f) {
    const double angle = 2.0 * std::numbers::pi * (f - 1) / 7.0;
    const double dir_n = std::cos(angle);
    const double dir_e = std::sin(angle);
    double chain_m = 0.0;
    std::string prev = "B00";
    for (int d = 1; d <= 8; ++d) {
      const double seg_km = (0.065 + 0.004 * ((f + d) % 4)) * (f == 7 ? 1.2 : 1.0);
      chain_m += seg_km * 1000.0 / 1.15;  // cable runs ~15% above the crow-fly distance

      char node_id[16];
      std::snprintf(node_id, sizeof node_id, "F%dN%d", f, d);
      char line_id[16];
      std::snprintf(line_id, sizeof line_id, "L%d%d", f, d);

      Node n;
      n.id = node_id;
      n.gps = offset(center, dir_n * chain_m, dir_e * chain_m);
      n.voltage_level = VoltageLevel::lv;
      n.base_voltage = 0.4;
      auto it = loads.find({f, d});
      n.nominal_power = it != loads.end() ? it->second : 0.0;
      n.kind = n.nominal_power > 0 ? NodeKind::service_entry
                                   : (d == 8 ? NodeKind::cabinet : NodeKind::junction);
      g.nodes.push_back(n);

      // Feeder 7 was extended with a thin spur; its tail is the weak spot of
      // the network.
      const char* kind = d == 1 ? "cu-95" : (f == 7 && d >= 5 ? "cu-16" : "cu-50");
      g.lines.push_back({line_id, prev, node_id, seg_km, kind, true});
      prev = node_id;
    }
  }

  Transformer t;
  t.rated_s = 630.0;
  t.short_circuit_impedance = {0.010, 0.040};
  t.tap_position = -3;  // boosts the LV busbar ~8% above nominal
  t.hv_node = "MV";
  t.lv_node = "B00";
  g.transformer = t;

  g.devices.push_back(
      {"BRK-MV", DeviceKind::breaker, "MV", std::nullopt, SwitchState::closed, 50.0});
  for (int f = 1; f <= 7; ++f) {
    char dev_id[16], line_id[16];
    std::snprintf(dev_id, sizeof dev_id, "FUSE-F%d", f);
    std::snprintf(line_id, sizeof line_id, "L%d1", f);
    g.devices.push_back(
        {dev_id, DeviceKind::fuse, "B00", std::string(line_id), SwitchState::closed, 200.0});
  }
  return g;
}

Grid make_toy_feeder(int depth, const std::vector<std::pair<int, double>>& loads,
                     double r_ohm_per_km, double segment_km) {
  Grid g;
  g.service_area_bbox = {45.8, 47.8, 5.9, 10.5};
  g.slack_node = "B0";
  const Gps base{46.10, 7.10};
  g.nodes.push_back({"B0", NodeKind::substation, base, VoltageLevel::lv, 0.0, 0.4});
  g.line_kinds.push_back(
      {"toy", r_ohm_per_km, 0.09, 0.0, 200.0, 50.0, Construction::buried});

  std::string prev = "B0";
  for (int d = 1; d <= depth; ++d) {
    std::string id = "N" + std::to_string(d);
    double pbar = 0.0;
    for (const auto& [ld, kw] : loads)
      if (ld == d) pbar = kw;
    g.nodes.push_back({id, pbar > 0 ? NodeKind::service_entry : NodeKind::junction,
                       offset(base, d * segment_km * 1000.0 / 1.15, 0.0), VoltageLevel::lv, pbar,
                       0.4});
    g.lines.push_back({"L" + std::to_string(d), prev, id, segment_km, "toy", true});
    prev = id;
  }
  return g;
}

Grid make_random_radial(std::mt19937& rng, int n_bus) {
  Grid g;
  g.service_area_bbox = {45.8, 47.8, 5.9, 10.5};
  g.slack_node = "B0";
  const Gps base{46.40, 7.60};

  std::uniform_real_distribution<double> r_dist(0.2, 0.6);
  std::uniform_real_distribution<double> x_dist(0.05, 0.20);
  std::uniform_real_distribution<double> b_dist(0.0, 60.0);
  std::uniform_real_distribution<double> len_dist(0.02, 0.10);
  std::uniform_real_distribution<double> load_dist(0.0, 12.0);

  for (int i = 0; i < n_bus; ++i) {
    std::string id = "B" + std::to_string(i);
    const double pbar = i == 0 ? 0.0 : std::round(load_dist(rng) * 10.0) / 10.0;
    g.nodes.push_back({id, i == 0 ? NodeKind::substation : NodeKind::service_entry,
                       offset(base, 30.0 * i, 15.0 * i), VoltageLevel::lv, pbar, 0.4});
  }
  for (int i = 1; i < n_bus; ++i) {
    std::uniform_int_distribution<int> parent_dist(0, i - 1);
    const int parent = parent_dist(rng);
    const std::string kind_name = "k" + std::to_string(i);
    g.line_kinds.push_back({kind_name, std::round(r_dist(rng) * 1000.0) / 1000.0,
                            std::round(x_dist(rng) * 1000.0) / 1000.0,
                            std::round(b_dist(rng) * 10.0) / 10.0, 200.0, 50.0,
                            Construction::buried});
    g.lines.push_back({"L" + std::to_string(i), "B" + std::to_string(parent),
                       "B" + std::to_string(i), std::round(len_dist(rng) * 1000.0) / 1000.0,
                       kind_name, true});
  }
  return g;
}

}  // namespace gridgate::testing
