#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "doctest.h"
#include "shearfree/burgers.hpp"
#include "shearfree/error.hpp"

using namespace shearfree;
using namespace shearfree::burgers;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::EvalError;
}

const ScalarFn identity = [](double x) { return x; };
const ScalarFn reversed = [](double x) { return -x; };

}  // namespace

TEST_CASE("eval_flat examples") {
  const ScalarFn c = [](double) { return -0.25; };
  for (const double u : {0.0, 0.4, 3.0})
    for (const double x : {-2.0, 0.0, 1.5}) CHECK(eval_flat(c, u, x) == -0.25);
  CHECK(eval_flat(identity, 1.0, 2.0) == doctest::Approx(1.0));
  CHECK(eval_flat(identity, 0.5, -0.3) == doctest::Approx(-0.2));
  CHECK(kind_of([] { (void)eval_flat(reversed, 1.0, 0.2); }) == ErrorKind::CausticReached);
  CHECK(kind_of([] { (void)eval_flat(reversed, 1.7, -0.1); }) == ErrorKind::CausticReached);
}

TEST_CASE("transport_eval examples") {
  const ScalarFn c = [](double) { return 0.5; };
  CHECK(transport_eval(c, 2.0, 1.0) == doctest::Approx(0.0));
  CHECK(transport_eval(identity, 1.0, 3.0) == doctest::Approx(1.5));
}

TEST_CASE("transversality of Cauchy curves") {
  CHECK(transversality_check(CauchyCurve::on_level(0.0, -1.0, 1.0, identity)) > 0.0);
  // A characteristic of its own datum: x = 2u with L = 2 along it.
  CauchyCurve own;
  own.gamma = [](double s) { return std::array<double, 2>{s, 2.0 * s}; };
  own.slope = [](double) { return 2.0; };
  CHECK(transversality_check(own) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("characteristic_trace examples") {
  const auto trace = characteristic_trace(Forcing{}, 0.0, 0.0, 1.0, 2.0);
  CHECK(trace.back().u == doctest::Approx(2.0));
  CHECK(trace.back().x == doctest::Approx(2.0));
  CHECK(trace.back().p == doctest::Approx(1.0));
  // x'' = x'^3 from p0 = 1 blows up at u = 1/2.
  CHECK(kind_of([] { (void)characteristic_trace(Forcing::constant({0, 0, 0, 1}), 0.0, 0.0, 1.0, 1.0); }) ==
        ErrorKind::BlowUp);
}

TEST_CASE("eval_forced examples") {
  const auto flat0 = CauchyCurve::on_level(0.0, -3.0, 3.0, [](double) { return 0.0; });
  const auto g = Forcing::constant({0.5});
  for (const double u : {0.2, 0.7, 1.0})
    for (const double x : {-1.0, 0.0, 0.9}) CHECK(eval_forced(g, flat0, u, x) == doctest::Approx(0.5 * u));
  const auto damp = Forcing::constant({0.0, 1.0});
  CHECK(eval_forced(damp, flat0, 0.8, 0.4) == doctest::Approx(0.0));
}

TEST_CASE("caustic_detect examples") {
  const BurgersSolution shock(Forcing{}, CauchyCurve::on_level(0.0, -1.0, 1.0, reversed));
  const auto cp = caustic_detect(shock, 0.0, 2.0);
  REQUIRE(cp.has_value());
  CHECK(cp->u == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(cp->x) <= 1e-6);

  const BurgersSolution spread(Forcing{}, CauchyCurve::on_level(0.0, -1.0, 1.0, identity));
  CHECK_FALSE(caustic_detect(spread, 0.0, 5.0).has_value());
  const BurgersSolution flat(Forcing{}, CauchyCurve::on_level(0.0, -1.0, 1.0, [](double) { return 0.3; }));
  CHECK_FALSE(caustic_detect(flat, 0.0, 5.0).has_value());
}

TEST_CASE("rigidity: non-constant data with a decreasing stretch meets a caustic at -1/inf L0'") {
  for (const double a : {0.5, 1.0, 2.0}) {
    const ScalarFn l0 = [a](double x) { return -a * std::tanh(x); };
    const BurgersSolution sol(Forcing{}, CauchyCurve::on_level(0.0, -2.0, 2.0, l0, 257));
    const auto cp = caustic_detect(sol, 0.0, 10.0);
    REQUIRE(cp.has_value());
    CHECK(cp->u == doctest::Approx(1.0 / a).epsilon(1e-3));
  }
}

TEST_CASE("Forcing is cubic by construction") {
  CHECK(kind_of([] { (void)Forcing::constant({1, 2, 3, 4, 5}); }) == ErrorKind::ForcingDegree);
  const std::vector<std::array<double, 3>> probes{{0, 0, 0}, {1, 1, 1}};
  CHECK(kind_of([&] {
          (void)Forcing::from_slope_function([](double, double, double, double p) { return p * p * p * p; }, probes);
        }) == ErrorKind::ForcingDegree);
  const auto cubic =
      Forcing::from_slope_function([](double u, double, double, double p) { return u + 0.5 * p * p * p; }, probes);
  CHECK(cubic(2.0, 0.0, 3.0) == doctest::Approx(2.0 + 13.5));
}

TEST_CASE("property: fourth difference in p of any Forcing vanishes") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const auto f = Forcing::constant({d(rng), d(rng), d(rng), d(rng)});
    const double p = d(rng), h = 0.25;
    const double diff4 = f(0, 0, p + 2 * h) - 4 * f(0, 0, p + h) + 6 * f(0, 0, p) - 4 * f(0, 0, p - h) +
                         f(0, 0, p - 2 * h);
    CHECK(std::abs(diff4) <= 1e-12);
  }
}

TEST_CASE("property: flat solutions are constant along characteristics") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> x0s(-1.0, 1.0), us(0.0, 0.9);
  const ScalarFn l0 = [](double x) { return 0.4 * std::sin(x) + 0.1; };
  for (int i = 0; i < 200; ++i) {
    const double x0 = x0s(rng), u = us(rng);
    const auto trace = characteristic_trace(Forcing{}, 0.0, x0, l0(x0), u, 0.05);
    for (const auto& s : trace) CHECK(std::abs(eval_flat(l0, s.u, s.x) - l0(x0)) <= 1e-12);
  }
}

TEST_CASE("property: shooting agrees with the flat solver") {
  const ScalarFn l0 = [](double x) { return 0.3 * std::tanh(x); };
  const auto curve = CauchyCurve::on_level(0.0, -4.0, 4.0, l0, 129);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> xs(-1.0, 1.0), us(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double u = us(rng), x = xs(rng);
    CHECK(std::abs(eval_forced(Forcing{}, curve, u, x) - eval_flat(l0, u, x)) <= 1e-9);
  }
}

TEST_CASE("residual converges at second order on a nonlinear flat solution") {
  const ScalarFn l0 = [](double x) { return 0.5 * std::sin(x); };
  auto field = [&](double u, double x) { return eval_flat(l0, u, x); };
  const double r1 = std::abs(pde_residual(field, Forcing{}, 0.5, 0.3, 0.02));
  const double r2 = std::abs(pde_residual(field, Forcing{}, 0.5, 0.3, 0.01));
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("dual ODE of straight families is straight") {
  DualOdeRequest req;
  req.targets = {{1.0, 0.5}, {2.0, -0.3}};
  for (int i = 0; i <= 4; ++i) req.a_values.push_back(-1.0 + 0.5 * i);
  CHECK(dual_ode_extract(Forcing{}, req).max_abs() <= 1e-6);
  const auto g = dual_ode_extract(Forcing::constant({0.5}), req);
  CHECK(g.max_abs() <= 1e-6);
  // Incidence curves b = (x - a - g u^2 / 2) / u.
  for (const auto& s : g.samples) CHECK(s.b == doctest::Approx((s.x - s.a - 0.25 * s.u * s.u) / s.u));
  // The fitted dual forcing is zero up to measurement noise, and the dual of
  // zero is zero again.
  const auto fitted = g.constant_forcing();
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(fitted.coefficient(i, 0, 0)) <= 1e-6);
  CHECK(dual_ode_extract(Forcing{}, req).constant_forcing().coefficient(0, 0, 0) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("bracketed_root") {
  const auto g = [](double x) { return x * x - 2.0; };
  CHECK(bracketed_root(g, 0.0, 2.0, g(0.0), g(2.0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}
