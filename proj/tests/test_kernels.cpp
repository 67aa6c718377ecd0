#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "shearfree/congruence.hpp"
#include "shearfree/kernels.hpp"

using namespace shearfree;
using kernels::Execution;

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

congruence::Congruence tanh_congruence() {
  congruence::ScatteringData d;
  d.section = [](double, double) { return 0.0; };
  d.slope_l = [](double x, double) { return 0.3 * std::tanh(x); };
  d.slope_m = [](double, double y) { return 0.2 * std::tanh(y); };
  d.x_min = d.y_min = -2.0;
  d.x_max = d.y_max = 4.0;
  return congruence::build_congruence(
      congruence::solve_scattering(d, burgers::Forcing{}, burgers::Forcing{}, {0.0, 1.0, 0.5, 1.5, 0.5, 1.5}));
}

}  // namespace

TEST_CASE("for_each_index visits every index once") {
  for (const auto exec : {Execution::Serial, Execution::Parallel}) {
    std::vector<int> hits(1000, 0);
    kernels::for_each_index(hits.size(), exec, [&](std::size_t i) { hits[i] += 1; });
    for (const int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("for_each_index rethrows the lowest failing index") {
  for (const auto exec : {Execution::Serial, Execution::Parallel}) {
    try {
      kernels::for_each_index(100, exec, [](std::size_t i) {
        if (i % 30 == 17) throw std::runtime_error("index " + std::to_string(i));
      });
      FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "index 17");
    }
  }
}

TEST_CASE("configure_threads") {
  CHECK(kernels::configure_threads(0) >= 1);
  CHECK(kernels::configure_threads(2) == 2);
  CHECK(kernels::max_threads() == 2);
  kernels::configure_threads(0);
}

TEST_CASE("field_sweep order has y fastest") {
  const congruence::Grid3 g{{0, 1, 2}, {0, 1, 3}, {0, 1, 4}};
  const auto v = kernels::field_sweep([](double u, double x, double y) { return 100 * u + 10 * x + y; }, g,
                                      Execution::Serial);
  REQUIRE(v.size() == 24);
  CHECK(v[1] == doctest::Approx(1.0 / 3.0));
  CHECK(v[4] == doctest::Approx(5.0));
  CHECK(v[12] == doctest::Approx(100.0));
}

TEST_CASE("serial and parallel sweeps are bitwise identical") {
  kernels::configure_threads(4);
  const auto c = tanh_congruence();
  const congruence::Grid4 g4{{0.0, 1.0, 3}, {0.5, 1.5, 3}, {0.5, 1.5, 3}, {-1.0, 1.0, 3}};

  const auto s = kernels::shear_sweep(c, g4, {}, Execution::Serial);
  const auto p = kernels::shear_sweep(c, g4, {}, Execution::Parallel);
  REQUIRE(s.size() == p.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(std::memcmp(&s[i].shear_norm, &p[i].shear_norm, sizeof(double)) == 0);
    CHECK(std::memcmp(&s[i].frobenius_m, &p[i].frobenius_m, sizeof(double)) == 0);
    CHECK(s[i].ok == p[i].ok);
  }
  CHECK(bitwise_equal(kernels::det_sweep(c, g4, 1e-3, Execution::Serial),
                      kernels::det_sweep(c, g4, 1e-3, Execution::Parallel)));

  const congruence::Grid3 g3{{0.0, 1.0, 4}, {0.5, 1.5, 4}, {0.5, 1.5, 4}};
  auto f = [&](double u, double x, double y) { return c.tangent(u, x, y)[1]; };
  CHECK(bitwise_equal(kernels::field_sweep(f, g3, Execution::Serial), kernels::field_sweep(f, g3, Execution::Parallel)));
  kernels::configure_threads(0);
}

TEST_CASE("shear_sweep records failures instead of throwing") {
  // A degenerate family: every point maps to the same geodesic.
  const congruence::Congruence collapsed(
      [](double, double, double) { return congruence::Geodesic{{1, 0, 0, 1}, {1, 0}, {0, 1}}; },
      klein::AffineChart::scri_adapted());
  const congruence::Grid4 g{{0, 1, 2}, {0, 1, 2}, {0, 1, 2}, {0, 1, 2}};
  const auto samples = kernels::shear_sweep(collapsed, g, {}, Execution::Parallel);
  for (const auto& s : samples) {
    CHECK_FALSE(s.ok);
    CHECK_FALSE(s.error.empty());
  }
}
