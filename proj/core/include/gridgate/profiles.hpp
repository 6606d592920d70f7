#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gridgate {

struct CurveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A normalized daily curve: dimensionless values relative to 1 kWp (PV) or
/// to the nominal power (load), sampled at t * dt over one day. Immutable
/// after load.
struct NormalizedCurve {
  std::vector<double> values;
  double dt_hours = 1.0 / 6.0;

  int steps() const { return static_cast<int>(values.size()); }
  /// Integral over the day, in hours (kWh per kW of scale).
  double energy() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * dt_hours;
  }
};

/// Clear-sky production shape of a 1 kWp plant at hour-of-day h:
/// max(0, sin(pi*(h-6)/12))^1.2, peaking at 1.0 at solar noon.
double pv_shape(double hour_of_day);

/// Residential consumption shape: overnight base, morning shoulder, evening
/// peak normalized to 1.0.
double load_shape(double hour_of_day);

NormalizedCurve builtin_pv_curve(double dt_hours = 1.0 / 6.0);
NormalizedCurve builtin_load_curve(double dt_hours = 1.0 / 6.0);

/// Reads a curve CSV (header 'value', one value per row). The row count must
/// tile exactly 24 h at dt_hours.
NormalizedCurve load_curve(const std::string& path, double dt_hours);
NormalizedCurve parse_curve_csv(const std::string& text, double dt_hours);

/// Pointwise scaling of a normalized curve to a node's nominal power (kW).
std::vector<double> scale_to_node(const NormalizedCurve& curve, double nominal_power_kw);

}  // namespace gridgate
