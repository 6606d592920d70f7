#pragma once

#include <vector>

#include "gridgate/findings.hpp"
#include "gridgate/grid.hpp"

namespace gridgate {

/// Thresholds for the basic rule checks. The bbox defaults to the grid's own
/// service area.
struct RuleConfig {
  double length_ratio_kappa = 1.5;  // > 1
  double length_floor_m = 25.0;     // suppresses false positives between co-located nodes
  double section_min = 10.0;        // mm^2
  double section_max = 400.0;       // mm^2
  BBox bbox;

  static RuleConfig defaults_for(const Grid& grid) {
    RuleConfig cfg;
    cfg.bbox = grid.service_area_bbox;
    return cfg;
  }
};

/// Manhattan distance in meters between two GPS points via equirectangular
/// projection (|dNorthing| + |dEasting|, R = 6371 km).
double manhattan_distance_m(const Gps& a, const Gps& b);

/// One finding per independent cycle in the graph of in-service LV lines.
std::vector<Finding> check_radiality(const Grid& grid);

/// One finding per node strictly outside the service-area bbox.
std::vector<Finding> check_gps_bounds(const Grid& grid, const RuleConfig& cfg);

/// Flags cable lengths larger than kappa * max(manhattan, floor).
std::vector<Finding> check_length_vs_manhattan(const Grid& grid, const RuleConfig& cfg);

/// Flags cable sections outside [section_min, section_max].
std::vector<Finding> check_sections(const Grid& grid, const RuleConfig& cfg);

/// One finding per absent required attribute (line length, line-kind
/// parameters, device rating, transformer rated_s, node GPS).
std::vector<Finding> check_missing_attributes(const Grid& grid);

/// Flags >= 2 closed fuses guarding the same line at the same node.
std::vector<Finding> check_parallel_fuses(const Grid& grid);

/// Runs every basic rule and returns the merged, deterministically sorted
/// report.
std::vector<Finding> run_basic_validation(const Grid& grid, const RuleConfig& cfg);

}  // namespace gridgate
