#include "gridgate/grid.hpp"

#include <algorithm>

namespace gridgate {

const Node* Grid::find_node(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const LineKind* Grid::find_line_kind(const std::string& name) const {
  for (const auto& k : line_kinds)
    if (k.name == name) return &k;
  return nullptr;
}

const Line* Grid::find_line(const std::string& id) const {
  for (const auto& l : lines)
    if (l.id == id) return &l;
  return nullptr;
}

const ProtectiveDevice* Grid::find_device(const std::string& id) const {
  for (const auto& d : devices)
    if (d.id == id) return &d;
  return nullptr;
}

std::vector<std::string> Grid::sorted_node_ids() const {
  std::vector<std::string> ids;
  ids.reserve(nodes.size());
  for (const auto& n : nodes) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::substation: return "substation";
    case NodeKind::cabinet: return "cabinet";
    case NodeKind::distribution_box: return "distribution-box";
    case NodeKind::junction: return "junction";
    case NodeKind::service_entry: return "service-entry";
  }
  return "?";
}

std::string to_string(VoltageLevel v) {
  return v == VoltageLevel::lv ? "LV" : "MV";
}

std::string to_string(Construction c) {
  return c == Construction::overhead ? "overhead" : "buried";
}

std::string to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::breaker: return "breaker";
    case DeviceKind::fuse: return "fuse";
    case DeviceKind::switch_gear: return "switch";
  }
  return "?";
}

std::string to_string(SwitchState s) {
  return s == SwitchState::open ? "open" : "closed";
}

}  // namespace gridgate
