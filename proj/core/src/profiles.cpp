#include "gridgate/profiles.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace gridgate {

namespace {

NormalizedCurve sample_day(double dt_hours, double (*shape)(double)) {
  if (!(dt_hours > 0.0)) throw CurveError("dt must be > 0");
  const double steps = 24.0 / dt_hours;
  const int t_count = static_cast<int>(std::llround(steps));
  if (std::abs(steps - t_count) > 1e-9)
    throw CurveError("dt does not tile 24 h");
  NormalizedCurve c;
  c.dt_hours = dt_hours;
  c.values.resize(t_count);
  for (int t = 0; t < t_count; ++t) c.values[t] = shape(t * dt_hours);
  return c;
}

}  // namespace

double pv_shape(double hour_of_day) {
  const double s = std::sin(std::numbers::pi * (hour_of_day - 6.0) / 12.0);
  if (hour_of_day <= 6.0 || hour_of_day >= 18.0 || s <= 0.0) return 0.0;
  return std::pow(s, 1.2);
}

double load_shape(double hour_of_day) {
  // Base + morning and evening bumps, normalized so the evening peak is 1.
  const double h = hour_of_day;
  auto bump = [](double h, double center, double width) {
    const double x = (h - center) / width;
    return std::exp(-x * x);
  };
  const double raw = 0.30 + 0.26 * bump(h, 7.5, 1.6) + 0.52 * bump(h, 19.0, 2.2);
  const double peak = 0.30 + 0.26 * bump(19.0, 7.5, 1.6) + 0.52;
  return raw / peak;
}

NormalizedCurve builtin_pv_curve(double dt_hours) { return sample_day(dt_hours, &pv_shape); }

NormalizedCurve builtin_load_curve(double dt_hours) { return sample_day(dt_hours, &load_shape); }

NormalizedCurve parse_curve_csv(const std::string& text, double dt_hours) {
  if (!(dt_hours > 0.0)) throw CurveError("dt must be > 0");
  NormalizedCurve c;
  c.dt_hours = dt_hours;
  std::istringstream in(text);
  std::string tok;
  int lineno = 0;
  while (std::getline(in, tok)) {
    ++lineno;
    while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
    if (tok.empty()) continue;
    if (lineno == 1 && tok == "value") continue;
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw CurveError("curve row " + std::to_string(lineno) + ": not a number: '" + tok + "'");
    }
    if (used != tok.size())
      throw CurveError("curve row " + std::to_string(lineno) + ": not a number: '" + tok + "'");
    if (v < 0.0)
      throw CurveError("curve row " + std::to_string(lineno) + ": negative value " + tok);
    if (v > 1.0 + 1e-12)
      throw CurveError("curve row " + std::to_string(lineno) + ": value " + tok +
                       " exceeds 1.0 (curves are normalized)");
    c.values.push_back(v);
  }
  const double span = c.values.size() * dt_hours;
  if (std::abs(span - 24.0) > 1e-9)
    throw CurveError("curve covers " + std::to_string(span) + " h at the given dt, expected 24 h");
  return c;
}

NormalizedCurve load_curve(const std::string& path, double dt_hours) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CurveError("cannot open curve file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_curve_csv(buf.str(), dt_hours);
}

std::vector<double> scale_to_node(const NormalizedCurve& curve, double nominal_power_kw) {
  if (nominal_power_kw < 0.0) throw CurveError("nominal power must be >= 0");
  std::vector<double> out(curve.values.size());
  for (size_t t = 0; t < out.size(); ++t) out[t] = curve.values[t] * nominal_power_kw;
  return out;
}

}  // namespace gridgate
