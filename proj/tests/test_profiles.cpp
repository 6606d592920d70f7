#include <cmath>

#include "doctest.h"

#include "gridgate/profiles.hpp"

using namespace gridgate;

TEST_CASE("curve loader") {
  SUBCASE("144 rows at 10 minutes tile the day") {
    std::string csv = "value\n";
    for (int i = 0; i < 144; ++i) csv += "0.5\n";
    const NormalizedCurve c = parse_curve_csv(csv, 1.0 / 6.0);
    CHECK(c.steps() == 144);
    CHECK(c.energy() == doctest::Approx(12.0));
  }
  SUBCASE("100 rows at 10 minutes do not") {
    std::string csv = "value\n";
    for (int i = 0; i < 100; ++i) csv += "0.5\n";
    CHECK_THROWS_WITH_AS(parse_curve_csv(csv, 1.0 / 6.0),
                         doctest::Contains("expected 24 h"), CurveError);
  }
  SUBCASE("negative value") {
    std::string csv = "value\n-0.1\n";
    CHECK_THROWS_WITH_AS(parse_curve_csv(csv, 24.0), doctest::Contains("negative"), CurveError);
  }
  SUBCASE("values above 1 are rejected") {
    std::string csv = "value\n1.2\n";
    CHECK_THROWS_AS(parse_curve_csv(csv, 24.0), CurveError);
  }
}

TEST_CASE("builtin PV curve") {
  const NormalizedCurve pv = builtin_pv_curve();
  REQUIRE(pv.steps() == 144);

  SUBCASE("peak 1.0 at solar noon, zero at night") {
    CHECK(pv_shape(12.0) == doctest::Approx(1.0));
    CHECK(pv.values[72] == doctest::Approx(1.0));  // t*dt = 12 h
    CHECK(pv_shape(3.0) == 0.0);
    CHECK(pv.values[18] == 0.0);
    CHECK(pv_shape(6.0) == 0.0);
    CHECK(pv_shape(18.0) == 0.0);
  }
  SUBCASE("daily energy near 7 kWh per kWp") {
    const double e = pv.energy();
    CHECK(e > 5.0);
    CHECK(e < 9.0);
    CHECK(e == doctest::Approx(7.208).epsilon(0.01));  // integral of sin^1.2 over the 12 h window
  }
  SUBCASE("symmetric about solar noon to 1e-12") {
    for (int t = 1; t < 144; ++t)
      CHECK(std::abs(pv.values[t] - pv.values[144 - t]) < 1e-12);
  }
}

TEST_CASE("builtin load curve") {
  const NormalizedCurve load = builtin_load_curve();
  REQUIRE(load.steps() == 144);
  double peak = 0.0;
  for (double v : load.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    peak = std::max(peak, v);
  }
  CHECK(peak == doctest::Approx(1.0));  // evening peak defines the nominal power
  CHECK(load_shape(19.0) == doctest::Approx(1.0));
  CHECK(load_shape(3.0) < 0.5);
}

TEST_CASE("scaling to a node") {
  const NormalizedCurve pv = builtin_pv_curve();
  SUBCASE("pointwise multiplication") {
    const auto scaled = scale_to_node(pv, 10.0);
    double peak = 0.0;
    for (double v : scaled) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(10.0));
  }
  SUBCASE("zero nominal power gives the zero series") {
    for (double v : scale_to_node(pv, 0.0)) CHECK(v == 0.0);
  }
  SUBCASE("linearity of the daily energy") {
    const auto scaled = scale_to_node(pv, 7.5);
    double sum = 0.0;
    for (double v : scaled) sum += v * pv.dt_hours;
    CHECK(sum == doctest::Approx(7.5 * pv.energy()));
  }
  SUBCASE("shape preserved: ratios between steps unchanged") {
    const auto scaled = scale_to_node(pv, 3.0);
    for (int t = 60; t < 90; ++t)
      if (pv.values[t + 1] > 0 && pv.values[t] > 0)
        CHECK(scaled[t] / scaled[t + 1] ==
              doctest::Approx(pv.values[t] / pv.values[t + 1]).epsilon(1e-12));
  }
}

TEST_CASE("alternate resolutions tile the day") {
  for (double dt : {1.0, 0.5, 0.25, 1.0 / 6.0, 1.0 / 12.0}) {
    const NormalizedCurve pv = builtin_pv_curve(dt);
    CHECK(pv.steps() * dt == doctest::Approx(24.0));
  }
  CHECK_THROWS_AS(builtin_pv_curve(0.7), CurveError);
}
