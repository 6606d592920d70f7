#include "gridgate/per_unit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridgate {

int PerUnitGrid::bus_of(const std::string& node_id) const {
  auto it = std::lower_bound(bus_ids.begin(), bus_ids.end(), node_id);
  if (it == bus_ids.end() || *it != node_id)
    throw std::invalid_argument("unknown node id '" + node_id + "'");
  return static_cast<int>(it - bus_ids.begin());
}

double PerUnitGrid::i_base_a(int bus) const {
  return s_base_kva / (std::sqrt(3.0) * v_base_kv.at(bus));
}

PerUnitGrid to_per_unit(const Grid& grid, double s_base_kva) {
  if (!(s_base_kva > 0.0)) throw std::invalid_argument("s_base must be > 0");

  PerUnitGrid pu;
  pu.s_base_kva = s_base_kva;
  pu.bus_ids = grid.sorted_node_ids();
  pu.v_base_kv.resize(pu.bus_ids.size());
  for (const auto& n : grid.nodes) {
    if (!(n.base_voltage > 0.0))
      throw std::invalid_argument("node '" + n.id + "' has non-positive base voltage");
    pu.v_base_kv[pu.bus_of(n.id)] = n.base_voltage;
  }
  pu.slack_bus = pu.bus_of(grid.slack_node);

  std::vector<const Line*> lines;
  for (const auto& l : grid.lines) lines.push_back(&l);
  std::sort(lines.begin(), lines.end(),
            [](const Line* a, const Line* b) { return a->id < b->id; });

  for (const Line* l : lines) {
    const LineKind* k = grid.find_line_kind(l->kind);
    if (!k) throw std::invalid_argument("line '" + l->id + "' has unresolved kind");
    if (!l->length || !k->params_complete())
      throw std::invalid_argument("line '" + l->id +
                                  "' is missing length or kind parameters; "
                                  "run basic validation before per-unit conversion");
    PerUnitBranch b;
    b.id = l->id;
    b.from_bus = pu.bus_of(l->from);
    b.to_bus = pu.bus_of(l->to);
    b.in_service = l->in_service;
    const double v_base = pu.v_base_kv[b.from_bus];
    // Z_base [ohm] = 1000 * kV^2 / kVA
    b.z_base_ohm = 1000.0 * v_base * v_base / s_base_kva;
    const double len = *l->length;
    b.z_series = std::complex<double>(*k->r_per_km, *k->x_per_km) * len / b.z_base_ohm;
    b.b_shunt = (*k->b_per_km) * 1e-6 * len * b.z_base_ohm;
    b.ampacity_pu = *k->ampacity / pu.i_base_a(b.from_bus);
    pu.branches.push_back(std::move(b));
  }

  if (grid.transformer) {
    const auto& t = *grid.transformer;
    if (!t.rated_s)
      throw std::invalid_argument("transformer is missing rated_s; "
                                  "run basic validation before per-unit conversion");
    PerUnitBranch b;
    b.id = "transformer";
    b.is_transformer = true;
    b.from_bus = pu.bus_of(t.hv_node);
    b.to_bus = pu.bus_of(t.lv_node);
    // Nameplate impedance re-based from the transformer rating to s_base.
    b.z_series = t.short_circuit_impedance * (s_base_kva / *t.rated_s);
    b.tap_ratio = 1.0 + kTapStep * t.tap_position;
    b.ampacity_pu = *t.rated_s / s_base_kva;  // |I| at V = 1 pu
    const double v_base = pu.v_base_kv[b.to_bus];
    b.z_base_ohm = 1000.0 * v_base * v_base / s_base_kva;
    pu.branches.push_back(std::move(b));
    pu.transformer_rated_s_kva = t.rated_s;
  }

  return pu;
}

std::vector<OhmicBranch> from_per_unit(const PerUnitGrid& pu) {
  std::vector<OhmicBranch> out;
  for (const auto& b : pu.branches) {
    if (b.is_transformer) continue;
    OhmicBranch o;
    o.id = b.id;
    o.r_ohm = b.z_series.real() * b.z_base_ohm;
    o.x_ohm = b.z_series.imag() * b.z_base_ohm;
    o.b_us = b.b_shunt / b.z_base_ohm * 1e6;
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace gridgate
