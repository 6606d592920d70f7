#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridgate/findings.hpp"
#include "gridgate/grid.hpp"
#include "gridgate/loadflow.hpp"
#include "gridgate/profiles.hpp"
#include "gridgate/rules.hpp"

namespace gridgate {

/// Basic validation reported error-severity findings; the advanced phase
/// refuses to run on top of them.
struct PrerequisiteFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CurveMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Statutory and physical operating limits.
struct LimitSet {
  double v_band_lv = 0.10;  // +-fraction around 1 pu
  double v_band_mv = 0.05;
  /// Ampacity at the grid connection point, ampere. When absent it is derived
  /// from the transformer rating: I = S / (sqrt(3) V_LL).
  std::optional<double> gcp_ampacity_a;
};

/// P = pbar*load_t - installed_pv*pv_t per node, Q from the load power
/// factor (PV at unity power factor). Rows follow bus order.
InjectionProfile synthesize_injections(const Grid& grid, const NormalizedCurve& load,
                                       const NormalizedCurve& pv,
                                       const std::map<std::string, double>& installed_pv_kwp,
                                       double power_factor = 0.9);

/// Scans a multi-period result for statutory violations. Findings are
/// coalesced per entity with the worst step reported; verbose keeps one
/// finding per (entity, step).
std::vector<Finding> detect_anomalies(const LoadFlowResult& result, const Grid& grid,
                                      const NetworkModel& net, const LimitSet& limits,
                                      bool verbose = false);

struct AdvancedConfig {
  RuleConfig rules;
  LimitSet limits;
  NormalizedCurve load_curve;
  NormalizedCurve pv_curve;  // unused under nominal conditions (installed PV = 0)
  double power_factor = 0.9;
  std::optional<double> s_base_kva;  // default: transformer rating, else 400
  NewtonOptions newton;
  bool verbose = false;
};

AdvancedConfig default_advanced_config(const Grid& grid);

double default_s_base_kva(const Grid& grid);

/// The full offline pipeline: incidence -> primitive -> bus admittance ->
/// nominal-condition injections -> multi-period load flow -> anomaly
/// criteria. Refuses (PrerequisiteFailed) when basic validation reports
/// error-severity findings.
std::vector<Finding> run_advanced_validation(const Grid& grid, const AdvancedConfig& cfg);

}  // namespace gridgate
