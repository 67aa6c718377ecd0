#include <algorithm>
#include <functional>
#include <random>

#include "doctest.h"
#include "shearfree/error.hpp"
#include "shearfree/klein.hpp"

using namespace shearfree;
using namespace shearfree::klein;
using projlin::span_canonical;
using projlin::unit;

namespace {

const Row e1 = unit(0), e2 = unit(1), e3 = unit(2), e4 = unit(3);

Row lin(std::initializer_list<std::pair<double, Row>> terms) {
  Row r{};
  for (const auto& [c, v] : terms)
    for (std::size_t i = 0; i < 4; ++i) r[i] += c * v[i];
  return r;
}

bool same(const Subspace& a, const Subspace& b) {
  return a.dim() == b.dim() && projlin::contains(a, b) && projlin::contains(b, a);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::EvalError;
}

}  // namespace

TEST_CASE("plucker_embed examples") {
  const auto p = plucker_embed(span_canonical({e1, e2}));
  CHECK(p.p == std::array<double, 6>{1, 0, 0, 0, 0, 0});

  // Minors of [[1,0,1,0],[0,1,0,1]]: p12 = 1, p13 = 0, p14 = 1, p23 = -1, p24 = 0, p34 = 1.
  const auto q = plucker_embed(span_canonical({lin({{1, e1}, {1, e3}}), lin({{1, e2}, {1, e4}})}));
  const std::array<double, 6> expected{1, 0, 1, -1, 0, 1};
  for (std::size_t i = 0; i < 6; ++i) CHECK(q.p[i] == doctest::Approx(expected[i]));
  CHECK(q.relation() == doctest::Approx(0.0));

  CHECK(kind_of([] { (void)plucker_embed(span_canonical({e1})); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("null_separation examples") {
  const auto a = span_canonical({lin({{1, e1}, {0.3, e3}}), lin({{1, e2}, {-2, e4}})});
  CHECK(null_separation(a, a) == 0.0);
  const auto chart = AffineChart::spacetime();
  const auto x = chart.plane({0, 0, 0, 0});
  const auto y = chart.plane({1, 0, 0, 0});
  CHECK(std::abs(null_separation(x, y)) <= 1e-15);
  CHECK(std::abs(null_separation(x, chart.plane({1, 0, 0, 1}))) > 0.1);
}

TEST_CASE("null separation in a chart is det of the difference") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const auto chart = AffineChart::spacetime();
  for (int i = 0; i < 500; ++i) {
    const Mat2 x{d(rng), d(rng), d(rng), d(rng)}, y{d(rng), d(rng), d(rng), d(rng)};
    const Mat2 diff{x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3]};
    const bool null = std::abs(det2(diff)) < 1e-12;
    CHECK((std::abs(null_separation(chart.plane(x), chart.plane(y))) < 1e-12) == null);
  }
}

TEST_CASE("metric polarizes det") {
  const Mat2 a{1, 2, 3, 4}, b{-1, 0.5, 2, 1};
  CHECK(metric(a, a) == doctest::Approx(det2(a)));
  CHECK(metric(a, b) == doctest::Approx(metric(b, a)));
}

TEST_CASE("scri_point examples") {
  CHECK(scri_point(0, 0, 0).plane == span_canonical({e1, e3}));
  CHECK(scri_point(1, 2, 3).plane == span_canonical({lin({{1, e1}, {2, e2}}), lin({{1, e3}, {3, e4}, {1, e2}})}));
}

TEST_CASE("scri_intersection example") {
  const auto v1 = span_canonical({lin({{1, e1}, {1, e3}})});
  const auto v3 = span_canonical({lin({{1, e1}, {1, e3}}), lin({{1, e2}, {1, e4}}), lin({{1, e1}, {-1, e2}})});
  const auto j = scri_intersection(projlin::PNFlag(v1, v3));
  CHECK(j.plane == span_canonical({lin({{1, e1}, {1, e3}}), lin({{1, e1}, {-1, e2}})}));
  CHECK(j.u == doctest::Approx(1.0));
  CHECK(j.x == doctest::Approx(-1.0));
  CHECK(j.y == doctest::Approx(0.0));
  CHECK(projlin::contains(j.plane, v1));
  CHECK(projlin::contains(v3, j.plane));
  CHECK(projlin::meet(j.plane, infinity_point()).dim() == 1);
}

TEST_CASE("scri_intersection rejects tangents at infinity") {
  const auto v3 = span_canonical({e1, e2, e3});
  CHECK(kind_of([&] { (void)scri_intersection(projlin::PNFlag(span_canonical({e1}), v3)); }) ==
        ErrorKind::TangentAtInfinity);
}

TEST_CASE("alpha and beta traces") {
  const auto t = alpha_trace_on_beta_plane(span_canonical({lin({{1, e1}, {-1, e3}})}), 0.0);
  CHECK(t.intercept == doctest::Approx(0.0));
  CHECK(t.slope == doctest::Approx(1.0));
  for (const double y0 : {-2.0, 0.0, 3.0}) {
    const auto c = alpha_trace_on_beta_plane(span_canonical({lin({{1, e1}, {5, e2}})}), y0);
    CHECK(c.intercept == doctest::Approx(5.0));
    CHECK(c.slope == doctest::Approx(0.0));
  }
  // Polar dual of the first alpha example.
  const Row w = polarity(lin({{1, e1}, {-1, e3}}));
  const auto v3 = projlin::annihilator(span_canonical({w}));
  const auto b = beta_trace_on_alpha_plane(v3, 0.0);
  CHECK(b.intercept == doctest::Approx(0.0));
  CHECK(b.slope == doctest::Approx(1.0));
  const auto v3c = projlin::annihilator(span_canonical({polarity(lin({{1, e1}, {5, e2}}))}));
  const auto bc = beta_trace_on_alpha_plane(v3c, 0.0);
  CHECK(bc.intercept == doctest::Approx(5.0));
  CHECK(bc.slope == doctest::Approx(0.0));
}

TEST_CASE("flag_from_slopes at the origin with zero slopes") {
  const auto f = flag_from_slopes(scri_point(0, 0, 0), 0.0, 0.0);
  CHECK(f.v1() == span_canonical({e1}));
  const auto t = alpha_trace_on_beta_plane(f.v1(), 0.0);
  CHECK(t.intercept == doctest::Approx(0.0));
  CHECK(t.slope == doctest::Approx(0.0));
  // Both factors lie at the spacetime chart's infinity.
  CHECK(kind_of([&] { (void)geodesic_chart_line(f); }) == ErrorKind::NoChartIntersection);
}

TEST_CASE("property: flag round trips through slopes and traces") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), mag(0.1, 2.0);
  for (int i = 0; i < 500; ++i) {
    const double u = pos(rng), x = pos(rng), y = pos(rng);
    const double l = (i % 2 ? 1 : -1) * mag(rng), m = (i % 3 ? 1 : -1) * mag(rng);
    const auto f = flag_from_slopes(scri_point(u, x, y), l, m);
    const auto p = scri_intersection(f);
    CHECK(std::abs(p.u - u) <= 1e-10);
    CHECK(std::abs(p.x - x) <= 1e-10);
    CHECK(std::abs(p.y - y) <= 1e-10);
    const auto a = alpha_trace_on_beta_plane(f.v1(), y);
    CHECK(a.slope == doctest::Approx(l).epsilon(1e-10));
    CHECK(a.intercept + a.slope * u == doctest::Approx(x).epsilon(1e-10));
    const auto b = beta_trace_on_alpha_plane(f.v3(), x);
    CHECK(b.slope == doctest::Approx(m).epsilon(1e-10));
    CHECK(b.intercept + b.slope * u == doctest::Approx(y).epsilon(1e-10));
  }
}

TEST_CASE("property: chart lines are null and rebuild their flag") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(-1.0, 1.0), mag(0.2, 1.5);
  const auto chart = AffineChart::scri_adapted();
  for (int i = 0; i < 300; ++i) {
    const auto f = flag_from_slopes(scri_point(pos(rng), pos(rng), pos(rng)), mag(rng), -mag(rng));
    const auto line = geodesic_chart_line(f, chart);
    CHECK(std::abs(det2(line.direction)) <= 1e-14);
    const double biggest = *std::max_element(line.direction.begin(), line.direction.end(),
                                             [](double a, double b) { return std::abs(a) < std::abs(b); });
    CHECK(biggest == 1.0);
    for (const double t : {-1.0, 0.5, 2.0}) {
      Mat2 z = line.base.X;
      for (std::size_t k = 0; k < 4; ++k) z[k] += t * line.direction[k];
      const auto plane = chart.plane(z);
      CHECK(projlin::contains(plane, f.v1()));
      CHECK(projlin::contains(f.v3(), plane));
    }
    const auto back = chart_line_flag(chart, line.base.X, line.alpha, line.beta);
    CHECK(same(back.v1(), f.v1()));
    CHECK(same(back.v3(), f.v3()));
  }
}

TEST_CASE("affine chart point inverts plane") {
  const auto chart = AffineChart::scri_adapted();
  const Mat2 z{0.3, 0.0, -1.2, 2.5};
  const auto back = chart.point(chart.plane(z));
  REQUIRE(back.has_value());
  for (std::size_t k = 0; k < 4; ++k) CHECK((*back)[k] == doctest::Approx(z[k]));
  const auto s = chart.point(scri_point(0.7, -0.4, 1.1).plane);
  REQUIRE(s.has_value());
  const Mat2 want{-0.4, 0.0, 0.7, 1.1};
  for (std::size_t k = 0; k < 4; ++k) CHECK((*s)[k] == doctest::Approx(want[k]));
  CHECK_FALSE(chart.point(span_canonical({e2, e4})).has_value());
}
