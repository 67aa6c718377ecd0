#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "doctest.h"
#include "shearfree/expr.hpp"

using namespace shearfree::expr;

namespace {

double at(const std::string& src, Env env = {}) { return Expression::parse(src).eval(env); }

std::size_t syntax_offset(const std::string& src) {
  try {
    (void)Expression::parse(src);
  } catch (const SyntaxError& e) {
    return e.offset();
  }
  FAIL("parsed: " << src);
  return 0;
}

// Random well-formed source text over the whole grammar.
std::string random_source(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
  static const char* vars[] = {"u", "x", "y", "p", "s"};
  static const char* funcs[] = {"sin", "cos", "tan", "tanh", "exp", "log", "sqrt", "abs"};
  static const char* ops[] = {"+", "-", "*", "/", "^"};
  switch (pick(rng)) {
    case 0: return vars[rng() % 5];
    case 1: return std::to_string(rng() % 100) + "." + std::to_string(rng() % 10);
    case 2: return "0.125";
    case 3: return "-" + random_source(rng, depth - 1);
    case 4: return "(" + random_source(rng, depth - 1) + ")";
    case 5: return std::string(funcs[rng() % 8]) + "(" + random_source(rng, depth - 1) + ")";
    default: return random_source(rng, depth - 1) + ops[rng() % 5] + random_source(rng, depth - 1);
  }
}

}  // namespace

TEST_CASE("evaluation examples") {
  CHECK(at("x/(1+u)", {.u = 1, .x = 2}) == 1.0);
  CHECK(at("-x^2", {.x = 3}) == -9.0);
  CHECK(at("2^3^2") == 512.0);
  CHECK(at("2^-1") == 0.5);
  CHECK(at("1 - 2 - 3") == -4.0);
  CHECK(at("8 / 4 / 2") == 1.0);
  CHECK(at("0.3*tanh(x)", {.x = 1}) == doctest::Approx(0.3 * std::tanh(1.0)));
  CHECK(at("1e-3 * 2") == 0.002);
}

TEST_CASE("syntax errors carry offsets and expected sets") {
  CHECK(syntax_offset("sin(") == 4);
  CHECK(syntax_offset("1 +") == 3);
  CHECK(syntax_offset("(x") == 2);
  CHECK(syntax_offset("x y") == 2);
  CHECK(syntax_offset("foo(x)") == 0);
  CHECK(syntax_offset("q") == 0);
  try {
    (void)Expression::parse("sin(");
  } catch (const SyntaxError& e) {
    CHECK_FALSE(e.expected().empty());
  }
}

TEST_CASE("domain errors report the offending span") {
  const auto e = Expression::parse("1 + log(x - 2)");
  try {
    (void)e.eval({.x = 1});
    FAIL("expected EvalError");
  } catch (const EvalError& err) {
    CHECK(err.span().begin == 4);
    CHECK(err.span().end == 14);
  }
  CHECK_THROWS_AS((void)at("1/(x-x)", {.x = 2}), EvalError);
  CHECK_THROWS_AS((void)at("sqrt(-1)"), EvalError);
  CHECK_THROWS_AS((void)at("(-8)^0.5"), EvalError);
  CHECK_THROWS_AS((void)at("exp(1000)"), EvalError);
}

TEST_CASE("print uses minimal parentheses") {
  CHECK(Expression::parse("((x))").print() == "x");
  CHECK(Expression::parse("(1+x)/(1+u)").print() == "(1 + x) / (1 + u)");
  CHECK(Expression::parse("(-x)^2").print() == "(-x)^2");
  CHECK(Expression::parse("-(x^2)").print() == "-x^2");
  CHECK(Expression::parse("(2^3)^2").print() == "(2^3)^2");
  CHECK(Expression::parse("2^(3^2)").print() == "2^3^2");
  CHECK(Expression::parse("x-(y-u)").print() == "x - (y - u)");
  CHECK(Expression::parse("(x-y)-u").print() == "x - y - u");
  CHECK(Expression::parse("0.1").print() == "0.1");
}

TEST_CASE("variable use is tracked") {
  const auto e = Expression::parse("u*sin(p)");
  CHECK(e.uses(Var::U));
  CHECK(e.uses(Var::P));
  CHECK_FALSE(e.uses(Var::X));
}

TEST_CASE("property: parse(print(parse(s))) == parse(s)") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 3000; ++i) {
    const std::string src = random_source(rng, 5);
    const auto a = Expression::parse(src);
    const auto b = Expression::parse(a.print());
    CHECK_MESSAGE(a == b, src << " printed as " << a.print());
    CHECK(b.print() == a.print());
  }
}

TEST_CASE("property: printed expressions evaluate identically") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(0.1, 2.0);
  int compared = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto a = Expression::parse(random_source(rng, 4));
    const auto b = Expression::parse(a.print());
    const Env env{d(rng), d(rng), d(rng), d(rng), d(rng)};
    try {
      const double va = a.eval(env);
      const double vb = b.eval(env);
      CHECK(std::bit_cast<std::uint64_t>(va) == std::bit_cast<std::uint64_t>(vb));
      ++compared;
    } catch (const EvalError&) {
      CHECK_THROWS_AS((void)b.eval(env), EvalError);
    }
  }
  CHECK(compared > 500);
}

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = d(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("nesting depth is bounded") {
  CHECK_THROWS_AS((void)Expression::parse(std::string(1000, '(') + "x" + std::string(1000, ')')), SyntaxError);
  CHECK_NOTHROW((void)Expression::parse(std::string(50, '(') + "x" + std::string(50, ')')));
}
