#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "shearfree/congruence.hpp"
#include "shearfree/error.hpp"

using namespace shearfree;
using namespace shearfree::congruence;

namespace {

ScatteringData flat_data(Field2 l0, Field2 m0) {
  ScatteringData d;
  d.section = [](double, double) { return 0.0; };
  d.slope_l = std::move(l0);
  d.slope_m = std::move(m0);
  d.x_min = d.y_min = -2.0;
  d.x_max = d.y_max = 4.0;
  return d;
}

ScatteringData tanh_data() {
  return flat_data([](double x, double) { return 0.3 * std::tanh(x); },
                   [](double, double y) { return 0.2 * std::tanh(y); });
}

const Box3 kBox{0.0, 1.0, 0.5, 1.5, 0.5, 1.5};
const Grid4 kSmall{{0.0, 1.0, 4}, {0.5, 1.5, 4}, {0.5, 1.5, 4}, {-1.0, 1.0, 3}};

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

TEST_CASE("Grid4 ordering has t fastest") {
  const Grid4 g{{0, 1, 2}, {0, 1, 2}, {0, 1, 2}, {0, 1, 3}};
  CHECK(g.size() == 24);
  CHECK(g.point(1) == std::array<double, 4>{0, 0, 0, 0.5});
  CHECK(g.point(3) == std::array<double, 4>{0, 0, 1, 0});
  CHECK(g.point(23) == std::array<double, 4>{1, 1, 1, 1});
}

TEST_CASE("solve_scattering examples") {
  const auto zero = solve_scattering(flat_data([](double, double) { return 0.0; }, [](double, double) { return 0.0; }),
                                     burgers::Forcing{}, burgers::Forcing{}, kBox);
  CHECK(zero.L(0.5, 1.0, 1.0) == 0.0);
  CHECK(zero.M(0.5, 1.0, 1.0) == 0.0);

  const auto id = solve_scattering(flat_data([](double x, double) { return x; }, [](double, double) { return 0.0; }),
                                   burgers::Forcing{}, burgers::Forcing{}, kBox);
  for (const double u : {0.0, 0.5, 1.0})
    for (const double x : {0.5, 1.2}) {
      CHECK(id.L(u, x, 0.7) == doctest::Approx(x / (1 + u)));
      CHECK(id.M(u, x, 0.7) == 0.0);
    }

  CHECK(kind_of([] {
          (void)solve_scattering(flat_data([](double x, double) { return -x; }, [](double, double) { return 0.0; }),
                                 burgers::Forcing{}, burgers::Forcing{}, {0.0, 1.5, -0.5, 0.5, -0.5, 0.5});
        }) == ErrorKind::CausticReached);
}

TEST_CASE("tanh field satisfies both equations per slice") {
  const auto k = solve_scattering(tanh_data(), burgers::Forcing{}, burgers::Forcing{}, kBox);
  CHECK(k.transversality_margin() > 0.0);
  for (const double u : {0.2, 0.8})
    for (const double x : {0.6, 1.4})
      for (const double y : {0.6, 1.4}) {
        CHECK(std::abs(k.l_residual(u, x, y, 1e-3)) <= 1e-6);
        CHECK(std::abs(k.m_residual(u, x, y, 1e-3)) <= 1e-6);
      }
}

TEST_CASE("built congruence: null tangents, straight fibres, round trip") {
  const auto k = solve_scattering(tanh_data(), burgers::Forcing{}, burgers::Forcing{}, kBox);
  const auto c = build_congruence(k, kSmall);
  for (std::size_t i = 0; i < kSmall.size(); ++i) {
    const auto [u, x, y, t] = kSmall.point(i);
    CHECK(std::abs(klein::det2(c.tangent(u, x, y))) <= 1e-14);
    const auto p0 = c.phi(u, x, y, 0.0), p1 = c.phi(u, x, y, 1.0), pt = c.phi(u, x, y, t);
    for (std::size_t j = 0; j < 4; ++j) CHECK(pt[j] == doctest::Approx(p0[j] + t * (p1[j] - p0[j])));
  }
  const auto scri = c.phi(0.3, 0.8, 1.1, 0.0);
  CHECK(scri == klein::Mat2{0.8, 0.0, 0.3, 1.1});
  const auto rt = scattering_roundtrip(c, tanh_data(), {0.5, 1.5, 6}, {0.5, 1.5, 6});
  CHECK(rt.max_coordinate_error <= 1e-9);
  CHECK(rt.max_slope_error <= 1e-9);
  CHECK(rt.max_chart_error <= 1e-9);
}

TEST_CASE("shear and Frobenius vanish together on the constructed congruence") {
  const auto k = solve_scattering(tanh_data(), burgers::Forcing{}, burgers::Forcing{}, kBox);
  const auto c = build_congruence(k);
  const auto report = shear_report(c, kSmall);
  CHECK(report.samples.size() == kSmall.size());
  CHECK(report.max_shear <= 1e-6);
  CHECK(report.max_frobenius <= 1e-6);
  const auto fr = frobenius_check(c, kSmall);
  CHECK(std::max(fr.max_sigma, fr.max_sigma_prime) == doctest::Approx(report.max_frobenius));

  const auto broken = shear_report(twisted(c, 0.1), kSmall);
  CHECK(broken.max_shear >= 0.05);
  CHECK(broken.max_frobenius >= 0.05);
}

TEST_CASE("parallel congruence has exactly zero shear") {
  const auto c = parallel_congruence();
  const auto report = shear_report(c, kSmall);
  CHECK(report.max_shear == 0.0);
  CHECK(report.max_frobenius == 0.0);
  const auto n = c.tangent(0.1, 0.2, 0.3);
  CHECK(n == c.tangent(0.9, -0.4, 1.2));
}

TEST_CASE("pass/fail is unchanged by rescaling the metric") {
  const auto k = solve_scattering(tanh_data(), burgers::Forcing{}, burgers::Forcing{}, kBox);
  const auto c = build_congruence(k);
  for (const auto& cong : {c, twisted(c, 0.1)}) {
    const auto base = shear_report(cong, kSmall);
    ShearOptions scaled;
    scaled.metric_scale = 7.5;
    const auto other = shear_report(cong, kSmall, scaled);
    for (std::size_t i = 0; i < base.samples.size(); ++i) {
      CHECK((base.samples[i].shear_norm <= 1e-6) == (other.samples[i].shear_norm <= 1e-6 * 7.5));
      CHECK(other.samples[i].shear_norm == doctest::Approx(7.5 * base.samples[i].shear_norm).epsilon(1e-9));
    }
  }
}

TEST_CASE("fibre sweep matches pointwise evaluation") {
  const auto k = solve_scattering(tanh_data(), burgers::Forcing{}, burgers::Forcing{}, kBox);
  const auto c = build_congruence(k);
  const std::vector<double> ts{-1.0, 0.0, 0.5};
  const auto fibre = shear_fibre(c, 0.4, 0.9, 1.2, ts);
  const auto dets = jacobian_dets(c, 0.4, 0.9, 1.2, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto one = shear_at(c, 0.4, 0.9, 1.2, ts[i]);
    CHECK(fibre[i].shear_norm == doctest::Approx(one.shear_norm).epsilon(1e-6).scale(1e-12));
    CHECK(dets[i] == doctest::Approx(one.det_jacobian));
    CHECK(dets[i] != 0.0);
  }
}

TEST_CASE("kappa has rank two") {
  const auto k = solve_scattering(tanh_data(), burgers::Forcing{}, burgers::Forcing{}, kBox);
  for (const double u : {0.0, 0.5, 1.0}) {
    const auto r = kappa_rank(k, u, 1.0, 1.0);
    CHECK(r.rank1 == 2);
    CHECK(r.rank3 == 2);
  }
}

TEST_CASE("forced pair with cubic forcings") {
  const auto sigma = burgers::Forcing::constant({0.1, 0, 0, 0.05});
  const auto sigma_tilde = burgers::Forcing::constant({0, 0, 0.05});
  const auto k = solve_scattering(tanh_data(), sigma, sigma_tilde, {0.0, 0.5, 0.5, 1.5, 0.5, 1.5});
  CHECK(std::abs(k.l_residual(0.3, 1.0, 1.0, 1e-3)) <= 1e-6);
  CHECK(std::abs(k.m_residual(0.3, 1.0, 1.0, 1e-3)) <= 1e-6);
  const auto c = build_congruence(k);
  CHECK(std::abs(klein::det2(c.tangent(0.3, 1.0, 1.0))) <= 1e-14);
}

TEST_CASE("data tangent to scri at the crossection fails to foliate") {
  // L0 = 0.3 tanh(x) vanishes on x = 0, where the geodesic lies in scri.
  const auto k = solve_scattering(tanh_data(), burgers::Forcing{}, burgers::Forcing{}, {0.0, 0.5, -0.5, 0.5, 0.5, 1.0});
  const Grid4 across{{0.0, 0.5, 3}, {-0.5, 0.5, 5}, {0.5, 1.0, 3}, {-1.0, 1.0, 3}};
  CHECK(kind_of([&] { (void)build_congruence(k, across); }) == ErrorKind::FoliationFailure);
}
