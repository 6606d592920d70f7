#include "gridgate/rules.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gridgate {

namespace {

constexpr double kEarthRadiusM = 6371000.0;

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  // Returns false when a and b were already connected.
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

std::string describe(const Line& l) {
  return "line '" + l.id + "' (" + l.from + " - " + l.to + ")";
}

}  // namespace

double manhattan_distance_m(const Gps& a, const Gps& b) {
  const double deg = std::numbers::pi / 180.0;
  const double d_northing = kEarthRadiusM * std::abs(a.lat - b.lat) * deg;
  const double mean_lat = 0.5 * (a.lat + b.lat) * deg;
  const double d_easting = kEarthRadiusM * std::abs(a.lon - b.lon) * deg * std::cos(mean_lat);
  return d_northing + d_easting;
}

std::vector<Finding> check_radiality(const Grid& grid) {
  std::vector<Finding> out;

  std::map<std::string, int> lv_index;
  for (const auto& n : grid.nodes)
    if (n.voltage_level == VoltageLevel::lv) lv_index.emplace(n.id, (int)lv_index.size());

  std::vector<const Line*> lines;
  for (const auto& l : grid.lines)
    if (l.in_service) lines.push_back(&l);
  std::sort(lines.begin(), lines.end(),
            [](const Line* a, const Line* b) { return a->id < b->id; });

  UnionFind uf((int)lv_index.size());
  for (const Line* l : lines) {
    auto f = lv_index.find(l->from);
    auto t = lv_index.find(l->to);
    if (f == lv_index.end() || t == lv_index.end()) continue;  // MV side not part of this check
    if (!uf.unite(f->second, t->second)) {
      out.push_back({"meshed-topology",
                     Severity::error,
                     Phase::basic,
                     {"line", l->id},
                     describe(*l) + " closes a mesh in the LV network",
                     std::nullopt,
                     std::nullopt});
    }
  }
  return out;
}

std::vector<Finding> check_gps_bounds(const Grid& grid, const RuleConfig& cfg) {
  std::vector<Finding> out;
  for (const auto& n : grid.nodes) {
    if (!n.gps) continue;
    if (!cfg.bbox.contains(*n.gps)) {
      std::ostringstream msg;
      msg << "node '" << n.id << "' at (" << n.gps->lat << ", " << n.gps->lon
          << ") lies outside the service area";
      out.push_back({"gps-out-of-area",
                     Severity::warning,
                     Phase::basic,
                     {"node", n.id},
                     msg.str(),
                     std::nullopt,
                     std::nullopt});
    }
  }
  return out;
}

std::vector<Finding> check_length_vs_manhattan(const Grid& grid, const RuleConfig& cfg) {
  std::vector<Finding> out;
  for (const auto& l : grid.lines) {
    if (!l.length) continue;
    const Node* a = grid.find_node(l.from);
    const Node* b = grid.find_node(l.to);
    if (!a || !b || !a->gps || !b->gps) continue;  // missing GPS is reported elsewhere
    const double manhattan_m = manhattan_distance_m(*a->gps, *b->gps);
    const double threshold_m =
        cfg.length_ratio_kappa * std::max(manhattan_m, cfg.length_floor_m);
    const double length_m = *l.length * 1000.0;
    if (length_m > threshold_m) {
      std::ostringstream msg;
      msg << describe(l) << " is " << length_m << " m long but the Manhattan distance is "
          << manhattan_m << " m";
      out.push_back({"length-vs-distance",
                     Severity::warning,
                     Phase::basic,
                     {"line", l.id},
                     msg.str(),
                     length_m,
                     threshold_m});
    }
  }
  return out;
}

std::vector<Finding> check_sections(const Grid& grid, const RuleConfig& cfg) {
  std::vector<Finding> out;
  for (const auto& l : grid.lines) {
    const LineKind* k = grid.find_line_kind(l.kind);
    if (!k || !k->section) continue;
    if (*k->section < cfg.section_min || *k->section > cfg.section_max) {
      std::ostringstream msg;
      msg << describe(l) << " uses kind '" << k->name << "' with section " << *k->section
          << " mm2 outside [" << cfg.section_min << ", " << cfg.section_max << "]";
      out.push_back({"section-out-of-range",
                     Severity::warning,
                     Phase::basic,
                     {"line", l.id},
                     msg.str(),
                     *k->section,
                     *k->section < cfg.section_min ? cfg.section_min : cfg.section_max});
    }
  }
  return out;
}

std::vector<Finding> check_missing_attributes(const Grid& grid) {
  std::vector<Finding> out;
  auto add = [&out](const std::string& rule, Severity sev, EntityRef entity, std::string msg) {
    out.push_back({rule, sev, Phase::basic, std::move(entity), std::move(msg), std::nullopt,
                   std::nullopt});
  };

  for (const auto& n : grid.nodes) {
    if (!n.gps)
      add("missing-gps", Severity::warning, {"node", n.id},
          "node '" + n.id + "' has no GPS coordinates");
  }
  for (const auto& l : grid.lines) {
    if (!l.length)
      add("missing-length", Severity::error, {"line", l.id}, describe(l) + " has no length");
  }
  for (const auto& k : grid.line_kinds) {
    auto param = [&](const std::optional<double>& v, const char* name) {
      if (!v)
        add("missing-kind-params", Severity::error, {"line_kind", k.name},
            "line kind '" + k.name + "' has no " + name);
    };
    param(k.r_per_km, "r_per_km");
    param(k.x_per_km, "x_per_km");
    param(k.b_per_km, "b_per_km");
    param(k.ampacity, "ampacity");
    param(k.section, "section");
  }
  for (const auto& d : grid.devices) {
    if (!d.rating)
      add("missing-rating", Severity::error, {"device", d.id},
          to_string(d.kind) + " '" + d.id + "' has no rating");
  }
  if (grid.transformer && !grid.transformer->rated_s)
    add("missing-rated-s", Severity::error, {"transformer", "transformer"},
        "transformer has no rated power");
  return out;
}

std::vector<Finding> check_parallel_fuses(const Grid& grid) {
  std::vector<Finding> out;
  // Closed fuses grouped by the (node, guarded line) pair they sit on.
  std::map<std::pair<std::string, std::string>, std::vector<const ProtectiveDevice*>> groups;
  for (const auto& d : grid.devices) {
    if (d.kind != DeviceKind::fuse || d.state != SwitchState::closed || !d.line) continue;
    groups[{d.node, *d.line}].push_back(&d);
  }
  for (const auto& [key, fuses] : groups) {
    if (fuses.size() < 2) continue;
    std::ostringstream msg;
    msg << "node '" << key.first << "' has " << fuses.size()
        << " closed fuses in parallel on line '" << key.second << "' (";
    for (size_t i = 0; i < fuses.size(); ++i) msg << (i ? ", " : "") << fuses[i]->id;
    msg << ")";
    out.push_back({"parallel-fuses",
                   Severity::error,
                   Phase::basic,
                   {"node", key.first},
                   msg.str(),
                   (double)fuses.size(),
                   1.0});
  }
  return out;
}

std::vector<Finding> run_basic_validation(const Grid& grid, const RuleConfig& cfg) {
  if (!(cfg.length_ratio_kappa > 1.0))
    throw std::invalid_argument("length ratio kappa must be > 1");
  if (!(cfg.section_min < cfg.section_max))
    throw std::invalid_argument("section_min must be below section_max");
  std::vector<Finding> all;
  auto append = [&all](std::vector<Finding> part) {
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  };
  append(check_radiality(grid));
  append(check_gps_bounds(grid, cfg));
  append(check_length_vs_manhattan(grid, cfg));
  append(check_sections(grid, cfg));
  append(check_missing_attributes(grid));
  append(check_parallel_fuses(grid));
  sort_findings(all);
  return all;
}

}  // namespace gridgate
