#include "gridgate/grid_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gridgate {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_fail(const std::string& what) { throw SchemaError(what); }

const json& require(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_fail(ctx + ": missing required field '" + key + "'");
  return *it;
}

double as_number(const json& v, const char* key, const std::string& ctx) {
  if (!v.is_number()) schema_fail(ctx + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::string as_string(const json& v, const char* key, const std::string& ctx) {
  if (!v.is_string()) schema_fail(ctx + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const char* key, const std::string& ctx) {
  if (!v.is_boolean()) schema_fail(ctx + ": field '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::optional<double> opt_number(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return as_number(*it, key, ctx);
}

NodeKind parse_node_kind(const std::string& s, const std::string& ctx) {
  if (s == "substation") return NodeKind::substation;
  if (s == "cabinet") return NodeKind::cabinet;
  if (s == "distribution-box") return NodeKind::distribution_box;
  if (s == "junction") return NodeKind::junction;
  if (s == "service-entry") return NodeKind::service_entry;
  schema_fail(ctx + ": unknown node kind '" + s + "'");
}

VoltageLevel parse_voltage_level(const std::string& s, const std::string& ctx) {
  if (s == "LV") return VoltageLevel::lv;
  if (s == "MV") return VoltageLevel::mv;
  schema_fail(ctx + ": unknown voltage level '" + s + "'");
}

Construction parse_construction(const std::string& s, const std::string& ctx) {
  if (s == "overhead") return Construction::overhead;
  if (s == "buried") return Construction::buried;
  schema_fail(ctx + ": unknown construction '" + s + "'");
}

DeviceKind parse_device_kind(const std::string& s, const std::string& ctx) {
  if (s == "breaker") return DeviceKind::breaker;
  if (s == "fuse") return DeviceKind::fuse;
  if (s == "switch") return DeviceKind::switch_gear;
  schema_fail(ctx + ": unknown device kind '" + s + "'");
}

SwitchState parse_switch_state(const std::string& s, const std::string& ctx) {
  if (s == "open") return SwitchState::open;
  if (s == "closed") return SwitchState::closed;
  schema_fail(ctx + ": unknown switch state '" + s + "'");
}

void check_positive(double v, const char* key, const std::string& ctx) {
  if (!(v > 0.0)) schema_fail(ctx + ": field '" + key + "' must be > 0");
}

void check_non_negative(double v, const char* key, const std::string& ctx) {
  if (!(v >= 0.0)) schema_fail(ctx + ": field '" + key + "' must be >= 0");
}

// Shortest decimal form that round-trips, for the DGS records.
std::string fmt_num(double v) {
  if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof probe, "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  return buf;
}

}  // namespace

Grid parse_grid_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("grid file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("grid file must be a JSON object");

  Grid g;

  const json& nodes = require(doc, "nodes", "grid");
  if (!nodes.is_array()) schema_fail("grid: 'nodes' must be an array");
  std::set<std::string> node_ids;
  for (const auto& jn : nodes) {
    Node n;
    n.id = as_string(require(jn, "id", "node"), "id", "node");
    const std::string ctx = "node '" + n.id + "'";
    if (!node_ids.insert(n.id).second) schema_fail(ctx + ": duplicate id");
    n.kind = parse_node_kind(as_string(require(jn, "kind", ctx), "kind", ctx), ctx);
    if (auto it = jn.find("gps"); it != jn.end() && !it->is_null()) {
      Gps p;
      p.lat = as_number(require(*it, "lat", ctx), "lat", ctx);
      p.lon = as_number(require(*it, "lon", ctx), "lon", ctx);
      n.gps = p;
    }
    n.voltage_level =
        parse_voltage_level(as_string(require(jn, "voltage_level", ctx), "voltage_level", ctx), ctx);
    n.nominal_power = as_number(require(jn, "nominal_power", ctx), "nominal_power", ctx);
    check_non_negative(n.nominal_power, "nominal_power", ctx);
    n.base_voltage = as_number(require(jn, "base_voltage", ctx), "base_voltage", ctx);
    check_positive(n.base_voltage, "base_voltage", ctx);
    g.nodes.push_back(std::move(n));
  }

  const json& kinds = require(doc, "line_kinds", "grid");
  if (!kinds.is_array()) schema_fail("grid: 'line_kinds' must be an array");
  std::set<std::string> kind_names;
  for (const auto& jk : kinds) {
    LineKind k;
    k.name = as_string(require(jk, "name", "line_kind"), "name", "line_kind");
    const std::string ctx = "line_kind '" + k.name + "'";
    if (!kind_names.insert(k.name).second) schema_fail(ctx + ": duplicate name");
    k.r_per_km = opt_number(jk, "r_per_km", ctx);
    k.x_per_km = opt_number(jk, "x_per_km", ctx);
    k.b_per_km = opt_number(jk, "b_per_km", ctx);
    k.ampacity = opt_number(jk, "ampacity", ctx);
    k.section = opt_number(jk, "section", ctx);
    if (k.r_per_km) check_positive(*k.r_per_km, "r_per_km", ctx);
    if (k.x_per_km) check_non_negative(*k.x_per_km, "x_per_km", ctx);
    if (k.b_per_km) check_non_negative(*k.b_per_km, "b_per_km", ctx);
    if (k.ampacity) check_positive(*k.ampacity, "ampacity", ctx);
    if (k.section) check_positive(*k.section, "section", ctx);
    k.construction =
        parse_construction(as_string(require(jk, "construction", ctx), "construction", ctx), ctx);
    g.line_kinds.push_back(std::move(k));
  }

  const json& lines = require(doc, "lines", "grid");
  if (!lines.is_array()) schema_fail("grid: 'lines' must be an array");
  std::set<std::string> line_ids;
  for (const auto& jl : lines) {
    Line l;
    l.id = as_string(require(jl, "id", "line"), "id", "line");
    const std::string ctx = "line '" + l.id + "'";
    if (!line_ids.insert(l.id).second) schema_fail(ctx + ": duplicate id");
    l.from = as_string(require(jl, "from", ctx), "from", ctx);
    l.to = as_string(require(jl, "to", ctx), "to", ctx);
    if (l.from == l.to) schema_fail(ctx + ": 'from' and 'to' must differ");
    l.length = opt_number(jl, "length", ctx);
    if (l.length) check_positive(*l.length, "length", ctx);
    l.kind = as_string(require(jl, "kind", ctx), "kind", ctx);
    if (auto it = jl.find("in_service"); it != jl.end())
      l.in_service = as_bool(*it, "in_service", ctx);
    if (!node_ids.count(l.from))
      throw ReferenceError(ctx + ": 'from' references unknown node '" + l.from + "'");
    if (!node_ids.count(l.to))
      throw ReferenceError(ctx + ": 'to' references unknown node '" + l.to + "'");
    if (!kind_names.count(l.kind))
      throw ReferenceError(ctx + ": references unknown line kind '" + l.kind + "'");
    g.lines.push_back(std::move(l));
  }

  if (auto it = doc.find("transformer"); it != doc.end() && !it->is_null()) {
    const json& jt = *it;
    Transformer t;
    const std::string ctx = "transformer";
    t.rated_s = opt_number(jt, "rated_s", ctx);
    if (t.rated_s) check_positive(*t.rated_s, "rated_s", ctx);
    const json& z = require(jt, "short_circuit_impedance", ctx);
    t.short_circuit_impedance = {as_number(require(z, "r", ctx), "r", ctx),
                                 as_number(require(z, "x", ctx), "x", ctx)};
    if (std::abs(t.short_circuit_impedance) <= 0.0)
      schema_fail("transformer: |short_circuit_impedance| must be > 0");
    const json& tap = require(jt, "tap_position", ctx);
    if (!tap.is_number_integer()) schema_fail("transformer: 'tap_position' must be an integer");
    t.tap_position = tap.get<int>();
    t.hv_node = as_string(require(jt, "hv_node", ctx), "hv_node", ctx);
    t.lv_node = as_string(require(jt, "lv_node", ctx), "lv_node", ctx);
    if (!node_ids.count(t.hv_node))
      throw ReferenceError("transformer: unknown hv_node '" + t.hv_node + "'");
    if (!node_ids.count(t.lv_node))
      throw ReferenceError("transformer: unknown lv_node '" + t.lv_node + "'");
    g.transformer = std::move(t);
  }

  if (auto it = doc.find("devices"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) schema_fail("grid: 'devices' must be an array");
    std::set<std::string> device_ids;
    for (const auto& jd : *it) {
      ProtectiveDevice d;
      d.id = as_string(require(jd, "id", "device"), "id", "device");
      const std::string ctx = "device '" + d.id + "'";
      if (!device_ids.insert(d.id).second) schema_fail(ctx + ": duplicate id");
      d.kind = parse_device_kind(as_string(require(jd, "kind", ctx), "kind", ctx), ctx);
      d.node = as_string(require(jd, "node", ctx), "node", ctx);
      if (!node_ids.count(d.node))
        throw ReferenceError(ctx + ": references unknown node '" + d.node + "'");
      if (auto jl = jd.find("line"); jl != jd.end() && !jl->is_null()) {
        d.line = as_string(*jl, "line", ctx);
        if (!line_ids.count(*d.line))
          throw ReferenceError(ctx + ": references unknown line '" + *d.line + "'");
      }
      d.state = parse_switch_state(as_string(require(jd, "state", ctx), "state", ctx), ctx);
      d.rating = opt_number(jd, "rating", ctx);
      if (d.rating) check_positive(*d.rating, "rating", ctx);
      g.devices.push_back(std::move(d));
    }
  }

  g.slack_node = as_string(require(doc, "slack_node", "grid"), "slack_node", "grid");
  if (!node_ids.count(g.slack_node))
    throw ReferenceError("grid: slack_node '" + g.slack_node + "' is not in the node set");

  const json& bb = require(doc, "service_area_bbox", "grid");
  g.service_area_bbox.lat_min = as_number(require(bb, "lat_min", "bbox"), "lat_min", "bbox");
  g.service_area_bbox.lat_max = as_number(require(bb, "lat_max", "bbox"), "lat_max", "bbox");
  g.service_area_bbox.lon_min = as_number(require(bb, "lon_min", "bbox"), "lon_min", "bbox");
  g.service_area_bbox.lon_max = as_number(require(bb, "lon_max", "bbox"), "lon_max", "bbox");
  if (g.service_area_bbox.lat_min >= g.service_area_bbox.lat_max ||
      g.service_area_bbox.lon_min >= g.service_area_bbox.lon_max)
    schema_fail("grid: service_area_bbox is degenerate");

  return g;
}

Grid parse_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open grid file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid_text(buf.str());
}

std::string serialize_grid(const Grid& grid) {
  json doc;
  doc["slack_node"] = grid.slack_node;
  doc["service_area_bbox"] = {{"lat_min", grid.service_area_bbox.lat_min},
                              {"lat_max", grid.service_area_bbox.lat_max},
                              {"lon_min", grid.service_area_bbox.lon_min},
                              {"lon_max", grid.service_area_bbox.lon_max}};

  doc["nodes"] = json::array();
  for (const auto& n : grid.nodes) {
    json jn;
    jn["id"] = n.id;
    jn["kind"] = to_string(n.kind);
    if (n.gps) jn["gps"] = {{"lat", n.gps->lat}, {"lon", n.gps->lon}};
    jn["voltage_level"] = to_string(n.voltage_level);
    jn["nominal_power"] = n.nominal_power;
    jn["base_voltage"] = n.base_voltage;
    doc["nodes"].push_back(std::move(jn));
  }

  doc["line_kinds"] = json::array();
  for (const auto& k : grid.line_kinds) {
    json jk;
    jk["name"] = k.name;
    if (k.r_per_km) jk["r_per_km"] = *k.r_per_km;
    if (k.x_per_km) jk["x_per_km"] = *k.x_per_km;
    if (k.b_per_km) jk["b_per_km"] = *k.b_per_km;
    if (k.ampacity) jk["ampacity"] = *k.ampacity;
    if (k.section) jk["section"] = *k.section;
    jk["construction"] = to_string(k.construction);
    doc["line_kinds"].push_back(std::move(jk));
  }

  doc["lines"] = json::array();
  for (const auto& l : grid.lines) {
    json jl;
    jl["id"] = l.id;
    jl["from"] = l.from;
    jl["to"] = l.to;
    if (l.length) jl["length"] = *l.length;
    jl["kind"] = l.kind;
    jl["in_service"] = l.in_service;
    doc["lines"].push_back(std::move(jl));
  }

  if (grid.transformer) {
    const auto& t = *grid.transformer;
    json jt;
    if (t.rated_s) jt["rated_s"] = *t.rated_s;
    jt["short_circuit_impedance"] = {{"r", t.short_circuit_impedance.real()},
                                     {"x", t.short_circuit_impedance.imag()}};
    jt["tap_position"] = t.tap_position;
    jt["hv_node"] = t.hv_node;
    jt["lv_node"] = t.lv_node;
    doc["transformer"] = std::move(jt);
  }

  doc["devices"] = json::array();
  for (const auto& d : grid.devices) {
    json jd;
    jd["id"] = d.id;
    jd["kind"] = to_string(d.kind);
    jd["node"] = d.node;
    if (d.line) jd["line"] = *d.line;
    jd["state"] = to_string(d.state);
    if (d.rating) jd["rating"] = *d.rating;
    doc["devices"].push_back(std::move(jd));
  }

  return doc.dump(2) + "\n";
}

std::string export_dgs(const Grid& grid) {
  std::ostringstream out;

  auto sorted_by = [](auto items, auto key) {
    std::sort(items.begin(), items.end(),
              [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return items;
  };

  out << "## TYPE\n";
  for (const auto& k : sorted_by(grid.line_kinds, [](const LineKind& k) { return k.name; })) {
    out << "class=LineKind;id=" << k.name;
    if (k.ampacity) out << ";nominal_current_a=" << fmt_num(*k.ampacity);
    if (k.r_per_km) out << ";r_ohm_per_km=" << fmt_num(*k.r_per_km);
    if (k.x_per_km) out << ";x_ohm_per_km=" << fmt_num(*k.x_per_km);
    if (k.b_per_km) out << ";b_us_per_km=" << fmt_num(*k.b_per_km);
    if (k.section) out << ";section_mm2=" << fmt_num(*k.section);
    out << ";construction=" << to_string(k.construction) << "\n";
  }
  if (grid.transformer) {
    const auto& t = *grid.transformer;
    out << "class=TransformerType;id=transformer";
    if (t.rated_s) out << ";rated_s_kva=" << fmt_num(*t.rated_s);
    out << ";z_sc_r_pu=" << fmt_num(t.short_circuit_impedance.real())
        << ";z_sc_x_pu=" << fmt_num(t.short_circuit_impedance.imag()) << "\n";
  }

  out << "## ELEMENT\n";
  for (const auto& n : sorted_by(grid.nodes, [](const Node& n) { return n.id; })) {
    out << "class=Node;id=" << n.id << ";kind=" << to_string(n.kind)
        << ";voltage_level=" << to_string(n.voltage_level)
        << ";nominal_power_kw=" << fmt_num(n.nominal_power)
        << ";base_voltage_kv=" << fmt_num(n.base_voltage) << "\n";
  }
  for (const auto& l : sorted_by(grid.lines, [](const Line& l) { return l.id; })) {
    out << "class=Line;id=" << l.id << ";type=" << l.kind;
    if (l.length) out << ";length_km=" << fmt_num(*l.length);
    out << ";out_of_service=" << (l.in_service ? 0 : 1) << ";conn_1=" << l.from
        << ";conn_2=" << l.to << "\n";
  }
  if (grid.transformer) {
    const auto& t = *grid.transformer;
    out << "class=Transformer;id=transformer;type=transformer;tap_position=" << t.tap_position
        << ";out_of_service=0;conn_1=" << t.hv_node << ";conn_2=" << t.lv_node << "\n";
  }
  for (const auto& d :
       sorted_by(grid.devices, [](const ProtectiveDevice& d) { return d.id; })) {
    out << "class=Device;id=" << d.id << ";kind=" << to_string(d.kind)
        << ";state=" << to_string(d.state);
    if (d.rating) out << ";rating_a=" << fmt_num(*d.rating);
    out << ";conn_1=" << d.node;
    if (d.line) out << ";conn_2=" << *d.line;
    out << "\n";
  }

  out << "## GRAPHIC\n";
  for (const auto& n : sorted_by(grid.nodes, [](const Node& n) { return n.id; })) {
    if (!n.gps) continue;
    out << "class=Node;id=" << n.id << ";lat=" << fmt_num(n.gps->lat)
        << ";lon=" << fmt_num(n.gps->lon) << "\n";
  }

  return out.str();
}

}  // namespace gridgate
