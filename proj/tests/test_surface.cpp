#include <cmath>
#include <algorithm>
#include <numbers>

#include "doctest.h"
#include "shearfree/burgers.hpp"
#include "shearfree/surface.hpp"

using namespace shearfree;
using namespace shearfree::burgers;

TEST_CASE("circle tangent lines") {
  const auto two = circle_tangent_lines(projlin::HPoint{2, 0, 1});
  REQUIRE(two.size() == 2);
  const double r3 = std::sqrt(3.0);
  for (const auto& l : two) {
    CHECK(l[0] * l[0] + l[1] * l[1] - l[2] * l[2] == doctest::Approx(0.0));
    CHECK(2 * l[0] + l[2] == doctest::Approx(0.0));
    CHECK(std::abs(std::abs(l[1] / l[0]) - r3) <= 1e-12);
  }
  const auto one = circle_tangent_lines(projlin::HPoint{1, 0, 1});
  REQUIRE(one.size() == 1);
  CHECK(one[0] == projlin::HPoint{1, 0, -1});
  CHECK(circle_tangent_lines(projlin::HPoint{0, 0, 1}).empty());
}

TEST_CASE("dual circle surface has two sheets ramified at infinity") {
  const auto s = surface_from_caustic(dual_circle(200));
  CHECK(s.sheets.size() == 2);
  REQUIRE(s.caustic.has_value());
  CHECK(s.caustic->samples.size() == 200);
  for (const auto& f : s.caustic->samples) {
    const auto r = circle_locus_residual(f);
    CHECK(std::abs(r.circle) <= 1e-10);
    CHECK(std::abs(r.incidence) <= 1e-10);
    CHECK(std::abs(r.dual) <= 1e-10);
  }
  CHECK_FALSE(s.ramification_thetas.empty());
  for (const auto& sheet : s.sheets) {
    for (const double t : {0.2, 0.7, 1.3}) {
      const double theta = sheet.theta_min + (sheet.theta_max - sheet.theta_min) * t / 1.5;
      const auto f = sheet.chart(1.0, theta);
      CHECK(std::abs(dot(f.point, f.line)) <= 1e-12);
    }
  }
}

TEST_CASE("pencil through a point degenerates the caustic to that point") {
  DualCurve pencil;
  // Lines through (0, 0, 1): p cos s + q sin s = 0.
  pencil.line = [](double s) { return Vec3{std::cos(s), std::sin(s), 0.0}; };
  pencil.s_min = 0.0;
  pencil.s_max = std::numbers::pi;
  pencil.samples = 50;
  const auto s = surface_from_caustic(pencil);
  REQUIRE(s.caustic.has_value());
  for (const auto& f : s.caustic->samples) {
    const double scale = std::max({std::abs(f.point[0]), std::abs(f.point[1]), std::abs(f.point[2])});
    CHECK(std::abs(f.point[0]) / scale <= 1e-9);
    CHECK(std::abs(f.point[1]) / scale <= 1e-9);
  }
}

TEST_CASE("conic with circle-tangent datum is transversal") {
  ProjectiveCauchyCurve conic;
  const double r2 = std::sqrt(2.0);
  conic.point = [r2](double s) { return std::array<double, 3>{r2 * std::cos(s), r2 * std::sin(s), 1.0}; };
  conic.line = [](double s) {
    const double o = std::numbers::pi / 4;
    return std::array<double, 3>{std::cos(s + o), std::sin(s + o), -1.0};
  };
  conic.s_max = 2 * std::numbers::pi;
  CHECK(transversality_check(conic) == doctest::Approx(0.5));
}

TEST_CASE("cross and dot") {
  CHECK(cross({1, 0, 0}, {0, 1, 0}) == Vec3{0, 0, 1});
  CHECK(dot({1, 2, 3}, {3, 0, -1}) == 0.0);
}
