#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "gridgate/grid.hpp"

namespace gridgate {

/// Per-position tap step of the substation transformer (fraction of nominal
/// ratio per tap position).
inline constexpr double kTapStep = 0.025;

struct PerUnitBranch {
  std::string id;  // line id, or "transformer" for the substation branch
  int from_bus = -1;
  int to_bus = -1;
  std::complex<double> z_series;  // pu
  double b_shunt = 0.0;           // pu, total line charging susceptance
  double tap_ratio = 1.0;         // ideal ratio at the from (HV) side
  std::optional<double> ampacity_pu;
  bool in_service = true;
  bool is_transformer = false;
  double z_base_ohm = 0.0;  // conversion base, kept for inversion
};

/// Grid reduced to per-unit electrical quantities on a common power base.
/// Buses follow Grid::sorted_node_ids() order.
struct PerUnitGrid {
  double s_base_kva = 0.0;
  std::vector<std::string> bus_ids;
  std::vector<double> v_base_kv;  // per bus
  int slack_bus = -1;
  std::vector<PerUnitBranch> branches;  // lines first (sorted by id), transformer last
  std::optional<double> transformer_rated_s_kva;

  int bus_of(const std::string& node_id) const;
  /// Current base in ampere at a bus, I = S / (sqrt(3) V_LL).
  double i_base_a(int bus) const;
};

struct OhmicBranch {
  std::string id;
  double r_ohm = 0.0;
  double x_ohm = 0.0;
  double b_us = 0.0;  // microsiemens, total
};

/// Builds the per-unit model. Requires line lengths and full line-kind
/// parameters (run basic validation first); throws std::invalid_argument
/// otherwise. z_pu = (r + jx) * length / Z_base with Z_base = V_base^2 / S_base.
PerUnitGrid to_per_unit(const Grid& grid, double s_base_kva);

/// Inverse conversion of the series/shunt parameters back to ohmic values.
std::vector<OhmicBranch> from_per_unit(const PerUnitGrid& pu);

}  // namespace gridgate
