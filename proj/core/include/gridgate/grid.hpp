#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace gridgate {

enum class NodeKind { substation, cabinet, distribution_box, junction, service_entry };
enum class VoltageLevel { lv, mv };
enum class Construction { overhead, buried };
enum class DeviceKind { breaker, fuse, switch_gear };
enum class SwitchState { open, closed };

struct Gps {
  double lat = 0.0;  // WGS84 degrees
  double lon = 0.0;
  bool operator==(const Gps&) const = default;
};

struct BBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;
  bool operator==(const BBox&) const = default;
  bool contains(const Gps& p) const {
    return p.lat >= lat_min && p.lat <= lat_max && p.lon >= lon_min && p.lon <= lon_max;
  }
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::junction;
  std::optional<Gps> gps;
  VoltageLevel voltage_level = VoltageLevel::lv;
  double nominal_power = 0.0;  // kW, 0 for pure junctions
  double base_voltage = 0.4;   // kV line-to-line
  bool operator==(const Node&) const = default;
};

/// Catalog entry shared by lines; electrical parameters are per km of cable.
/// Parameters are optional so that incomplete database exports still parse;
/// rule-validation flags the gaps.
struct LineKind {
  std::string name;
  std::optional<double> r_per_km;  // ohm/km
  std::optional<double> x_per_km;  // ohm/km
  std::optional<double> b_per_km;  // microsiemens/km
  std::optional<double> ampacity;  // A
  std::optional<double> section;   // mm^2
  Construction construction = Construction::buried;
  bool operator==(const LineKind&) const = default;

  bool params_complete() const {
    return r_per_km && x_per_km && b_per_km && ampacity && section;
  }
};

struct Line {
  std::string id;
  std::string from;
  std::string to;
  std::optional<double> length;  // km
  std::string kind;              // LineKind name
  bool in_service = true;
  bool operator==(const Line&) const = default;
};

/// MV/LV substation transformer. Also carries the upstream grid's
/// short-circuit impedance folded into the series branch behind the slack.
struct Transformer {
  std::optional<double> rated_s;  // kVA
  std::complex<double> short_circuit_impedance{0.01, 0.04};  // pu on rated_s
  int tap_position = 0;
  std::string hv_node;
  std::string lv_node;
  bool operator==(const Transformer&) const = default;
};

struct ProtectiveDevice {
  std::string id;
  DeviceKind kind = DeviceKind::fuse;
  std::string node;
  std::optional<std::string> line;  // line the device guards, when tied to one
  SwitchState state = SwitchState::closed;
  std::optional<double> rating;  // A
  bool operator==(const ProtectiveDevice&) const = default;
};

/// One electrical network snapshot. Immutable after construction; shared
/// read-only across workers.
struct Grid {
  std::vector<Node> nodes;
  std::vector<LineKind> line_kinds;
  std::vector<Line> lines;
  std::optional<Transformer> transformer;
  std::vector<ProtectiveDevice> devices;
  std::string slack_node;
  BBox service_area_bbox;
  bool operator==(const Grid&) const = default;

  const Node* find_node(const std::string& id) const;
  const LineKind* find_line_kind(const std::string& name) const;
  const Line* find_line(const std::string& id) const;
  const ProtectiveDevice* find_device(const std::string& id) const;

  /// Node ids in canonical (sorted) order; every bus-indexed structure in
  /// the library uses this ordering.
  std::vector<std::string> sorted_node_ids() const;
};

std::string to_string(NodeKind k);
std::string to_string(VoltageLevel v);
std::string to_string(Construction c);
std::string to_string(DeviceKind k);
std::string to_string(SwitchState s);

}  // namespace gridgate
