#pragma once

#include <random>
#include <utility>
#include <vector>

#include "gridgate/grid.hpp"

namespace gridgate::testing {

/// Smallest valid grid: two nodes, one line, no transformer.
Grid make_minimal_grid();

/// Reconstruction of the case-study network: 58 nodes (MV slack + LV busbar
/// + 7 feeders of 8 nodes), 19 load nodes totalling 319 kW, 630 kVA
/// transformer, radial, GPS around Sion. Passes both validation phases.
Grid make_case58();

/// Small radial feeder for hosting oracles: a slack busbar plus a chain of
/// `depth` nodes; nodes listed in `load_depths` carry the given nominal
/// powers. No transformer.
Grid make_toy_feeder(int depth, const std::vector<std::pair<int, double>>& loads,
                     double r_ohm_per_km = 0.9, double segment_km = 0.06);

/// Random radial LV grid with n_bus buses (bus 0 = slack), random impedances
/// and loads; used against the fixed-point oracle.
Grid make_random_radial(std::mt19937& rng, int n_bus);

/// Consumption in kW per node id for make_random_radial grids (deterministic
/// from the grid itself).
}  // namespace gridgate::testing
