#include "shearfree/scenario.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "shearfree/burgers.hpp"
#include "shearfree/congruence.hpp"
#include "shearfree/expr.hpp"
#include "shearfree/kernels.hpp"
#include "shearfree/surface.hpp"

namespace shearfree::scenario {
namespace fs = std::filesystem;
using nlohmann::json;
using expr::Expression;
using expr::Var;

namespace {

constexpr std::array<std::pair<Kind, std::string_view>, 6> kKinds{{
    {Kind::BurgersFlat, "burgers-flat"},
    {Kind::BurgersForced, "burgers-forced"},
    {Kind::Caustic, "caustic"},
    {Kind::DualOde, "dual-ode"},
    {Kind::CircleExample, "circle-example"},
    {Kind::Congruence, "congruence"},
}};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

std::string where_string(Location at) {
  return std::to_string(at.line) + ":" + std::to_string(at.column);
}

unsigned var_mask(std::initializer_list<Var> vars) {
  unsigned m = 0;
  for (Var v : vars) m |= 1u << static_cast<unsigned>(v);
  return m;
}

// ---------------------------------------------------------------- parameters

// Typed access to the document. Every read is echoed; keys never read are
// rejected by finish().
class Params {
 public:
  explicit Params(const Document& doc) : doc_(doc), used_(doc.entries.size(), false) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key, Location* at = nullptr) {
    for (std::size_t i = 0; i < doc_.entries.size(); ++i) {
      const Entry& e = doc_.entries[i];
      if (e.section == section && e.key == key) {
        used_[i] = true;
        if (at) *at = e.value_at;
        return e.value;
      }
    }
    return std::nullopt;
  }

  double number(const std::string& section, const std::string& key, std::optional<double> fallback = {}) {
    Location at;
    const auto text = raw(section, key, &at);
    double v = 0.0;
    if (!text) {
      v = require(fallback, section, key);
    } else {
      v = parse_double(*text, at, key);
    }
    echo(section, key) = v;
    return v;
  }

  std::optional<double> optional_number(const std::string& section, const std::string& key) {
    Location at;
    const auto text = raw(section, key, &at);
    if (!text) return std::nullopt;
    const double v = parse_double(*text, at, key);
    echo(section, key) = v;
    return v;
  }

  std::size_t count(const std::string& section, const std::string& key, std::optional<std::size_t> fallback = {},
                    std::size_t minimum = 1) {
    Location at;
    const auto text = raw(section, key, &at);
    std::size_t v = 0;
    if (!text) {
      v = require(fallback, section, key);
    } else {
      const auto res = std::from_chars(text->data(), text->data() + text->size(), v);
      if (res.ec != std::errc() || res.ptr != text->data() + text->size()) {
        throw ScenarioError(at, "'" + key + "' must be a non-negative integer, got '" + *text + "'");
      }
    }
    if (v < minimum) {
      throw ScenarioError(at, "'" + key + "' must be at least " + std::to_string(minimum));
    }
    echo(section, key) = v;
    return v;
  }

  bool flag(const std::string& section, const std::string& key, bool fallback) {
    Location at;
    const auto text = raw(section, key, &at);
    bool v = fallback;
    if (text) {
      if (*text == "true") v = true;
      else if (*text == "false") v = false;
      else throw ScenarioError(at, "'" + key + "' must be true or false, got '" + *text + "'");
    }
    echo(section, key) = v;
    return v;
  }

  std::vector<double> numbers(const std::string& section, const std::string& key,
                              std::optional<std::vector<double>> fallback = {}) {
    Location at;
    const auto text = raw(section, key, &at);
    std::vector<double> out;
    if (!text) {
      out = require(fallback, section, key);
    } else {
      std::stringstream ss(*text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), at, key));
    }
    echo(section, key) = out;
    return out;
  }

  std::string text(const std::string& section, const std::string& key, std::optional<std::string> fallback = {}) {
    const auto t = raw(section, key);
    const std::string v = t ? *t : require(fallback, section, key);
    echo(section, key) = v;
    return v;
  }

  /// Parses an expression and checks it only uses `allowed` variables.
  Expression expression(const std::string& section, const std::string& key, unsigned allowed,
                        std::optional<std::string> fallback = {}) {
    Location at;
    const auto t = raw(section, key, &at);
    const std::string src = t ? *t : require(fallback, section, key);
    Expression e;
    try {
      e = Expression::parse(src);
    } catch (const expr::SyntaxError& err) {
      throw ScenarioError({at.line, at.column + err.offset()}, "in '" + key + "': " + err.what());
    }
    for (unsigned v = 0; v < 5; ++v) {
      if (e.uses(static_cast<Var>(v)) && !(allowed & (1u << v))) {
        throw ScenarioError(at, "'" + key + "' may not use the variable '" +
                                    std::string(expr::to_string(static_cast<Var>(v))) + "'");
      }
    }
    echo(section, key) = json{{"source", src}, {"parsed", e.print()}};
    return e;
  }

  void finish() const {
    for (std::size_t i = 0; i < doc_.entries.size(); ++i) {
      if (used_[i]) continue;
      const Entry& e = doc_.entries[i];
      const std::string name = e.section.empty() ? e.key : "[" + e.section + "] " + e.key;
      throw ScenarioError(e.key_at, "unknown key " + name);
    }
  }

  const json& echoed() const { return echo_; }

 private:
  json& echo(const std::string& section, const std::string& key) {
    return section.empty() ? echo_[key] : echo_[section][key];
  }

  template <class T>
  T require(const std::optional<T>& fallback, const std::string& section, const std::string& key) {
    if (fallback) return *fallback;
    throw ScenarioError({0, 0}, "missing required key " + (section.empty() ? key : "[" + section + "] " + key));
  }

  static double parse_double(const std::string& text, Location at, const std::string& key) {
    double v = 0.0;
    const char* first = text.data();
    if (!text.empty() && text[0] == '+') ++first;
    const auto res = std::from_chars(first, text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
      throw ScenarioError(at, "'" + key + "' must be a finite number, got '" + text + "'");
    }
    return v;
  }

  const Document& doc_;
  std::vector<bool> used_;
  json echo_ = json::object();
};

// ---------------------------------------------------------------- outputs

class Csv {
 public:
  Csv(const std::optional<fs::path>& dir, const std::string& name, const std::vector<std::string>& header) {
    if (!dir) return;
    out_.open(*dir / name, std::ios::binary);
    if (!out_) throw Error(ErrorKind::ScenarioError, "cannot write " + (*dir / name).string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    if (!out_.is_open()) return;
    bool first = true;
    for (const double v : values) {
      out_ << (first ? "" : ",") << expr::format_double(v);
      first = false;
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;
  bool pass = false;
};

struct Context {
  RunOptions opts;
  json results = json::object();
  std::vector<Check> checks;
  std::vector<std::string> artifacts;

  void at_most(const std::string& name, double value, double limit) {
    checks.push_back({name, value, limit, "<=", value <= limit});
  }
  void at_least(const std::string& name, double value, double limit) {
    checks.push_back({name, value, limit, ">=", value >= limit});
  }
  void holds(const std::string& name, bool ok) { checks.push_back({name, ok ? 1.0 : 0.0, 1.0, "==", ok}); }

  Csv csv(const std::string& name, const std::vector<std::string>& header) {
    if (opts.out_dir) artifacts.push_back(name);
    return Csv(opts.out_dir, name, header);
  }
};

burgers::SolverOptions read_solver(Params& p) {
  burgers::SolverOptions o;
  o.step = p.number("solver", "step", o.step);
  o.state_bound = p.number("solver", "state_bound", o.state_bound);
  o.scan_samples = p.count("solver", "scan_samples", o.scan_samples, 2);
  o.search_radius = p.number("solver", "search_radius", o.search_radius);
  o.max_iterations = p.count("solver", "max_iterations", o.max_iterations);
  return o;
}

congruence::Axis read_axis(Params& p, const std::string& section, const std::string& name,
                           std::optional<double> lo, std::optional<double> hi, std::size_t n) {
  congruence::Axis a;
  a.min = p.number(section, name + "_min", lo);
  a.max = p.number(section, name + "_max", hi);
  a.n = p.count(section, "n" + name, n);
  if (!(a.min <= a.max)) throw ScenarioError({0, 0}, "[" + section + "] " + name + "_min exceeds " + name + "_max");
  return a;
}

// sigma(u, x, p) on a leaf: a constant zero expression maps to the exact
// zero forcing, anything else goes through the cubic-closure probe.
burgers::Forcing leaf_forcing(const Expression& sigma, const congruence::Axis& u, const congruence::Axis& x) {
  if (sigma.print() == "0") return burgers::Forcing{};
  std::vector<std::array<double, 3>> probes;
  for (const double uu : {u.min, 0.5 * (u.min + u.max), u.max}) {
    for (const double xx : {x.min, 0.5 * (x.min + x.max), x.max}) probes.push_back({uu, xx, 0.0});
  }
  return burgers::Forcing::from_slope_function(
      [sigma](double uu, double pos, double, double slope) {
        return sigma.eval({.u = uu, .x = pos, .y = 0.0, .p = slope, .s = 0.0});
      },
      probes);
}

burgers::ScalarFn of_x(const Expression& e) {
  return [e](double x) { return e.eval({.u = 0.0, .x = x, .y = 0.0, .p = 0.0, .s = 0.0}); };
}

// ---------------------------------------------------------------- burgers-flat / burgers-forced

void run_burgers(Params& p, Context& ctx, bool forced) {
  const Expression l0 = p.expression("data", "L0", var_mask({Var::X}));
  const std::optional<Expression> exact =
      p.raw("data", "exact") ? std::optional{p.expression("data", "exact", var_mask({Var::U, Var::X}))}
                             : std::nullopt;
  std::optional<Expression> sigma;
  double u0 = 0.0, cx_min = 0.0, cx_max = 0.0;
  std::size_t curve_samples = 65;
  const congruence::Axis us = read_axis(p, "grid", "u", 0.0, 1.0, 11);
  const congruence::Axis xs = read_axis(p, "grid", "x", -1.0, 1.0, 21);
  if (forced) {
    sigma = p.expression("data", "sigma", var_mask({Var::U, Var::X, Var::P}), "0");
    u0 = p.number("data", "u0", 0.0);
    cx_min = p.number("data", "x_min", xs.min - 2.0);
    cx_max = p.number("data", "x_max", xs.max + 2.0);
    curve_samples = p.count("data", "samples", 65, 2);
  }
  const double tolerance = p.number("check", "tolerance", 1e-9);
  const double residual_h = p.number("check", "residual_h", 1e-3);
  const std::optional<double> residual_tolerance = p.optional_number("check", "residual_tolerance");
  const bool expect_caustic = p.flag("check", "expect_caustic", false);
  const double caustic_u_tol = p.number("check", "caustic_u_tol", 1e-8);
  const std::optional<double> expected_u_star = p.optional_number("check", "expected_u_star");
  const std::optional<double> expected_x_star = p.optional_number("check", "expected_x_star");
  const double caustic_tolerance = p.number("check", "caustic_tolerance", 1e-6);
  const burgers::SolverOptions solver = read_solver(p);
  p.finish();

  const burgers::ScalarFn initial = of_x(l0);
  burgers::Forcing f;
  burgers::CauchyCurve curve;
  if (forced) {
    f = leaf_forcing(*sigma, us, xs);
    curve = burgers::CauchyCurve::on_level(u0, cx_min, cx_max, initial, curve_samples);
  }
  auto field = [&](double u, double x) {
    return forced ? burgers::eval_forced(f, curve, u, x, solver) : burgers::eval_flat(initial, u, x, solver);
  };

  const std::size_t n = us.n * xs.n;
  std::vector<double> values(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> residuals(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> failures(n);
  kernels::for_each_index(n, kernels::Execution::Parallel, [&](std::size_t i) {
    const double u = us.at(i / xs.n), x = xs.at(i % xs.n);
    try {
      values[i] = field(u, x);
      residuals[i] = burgers::pde_residual(field, f, u, x, residual_h);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CausticReached) throw;
      failures[i] = e.what();
    }
  });

  double max_error = 0.0, max_residual = 0.0;
  std::size_t evaluated = 0, unresolved = 0;
  Csv out = ctx.csv("L.csv", {"u", "x", "L"});
  for (std::size_t i = 0; i < n; ++i) {
    const double u = us.at(i / xs.n), x = xs.at(i % xs.n);
    if (!failures[i].empty()) {
      ++unresolved;
      continue;
    }
    ++evaluated;
    out.row({u, x, values[i]});
    if (exact) max_error = std::max(max_error, std::abs(values[i] - exact->eval({.u = u, .x = x})));
    if (std::isfinite(residuals[i])) max_residual = std::max(max_residual, std::abs(residuals[i]));
  }
  ctx.results["evaluated_points"] = evaluated;
  ctx.results["unresolved_points"] = unresolved;
  ctx.results["max_pde_residual"] = max_residual;
  if (exact) {
    ctx.results["max_error"] = max_error;
    ctx.at_most("max |L - exact|", max_error, tolerance);
  }
  if (residual_tolerance) ctx.at_most("max pde residual", max_residual, *residual_tolerance);

  if (unresolved > 0 && !expect_caustic) {
    const auto first = std::find_if(failures.begin(), failures.end(), [](const auto& s) { return !s.empty(); });
    throw Error(ErrorKind::CausticReached, *first);
  }
  if (expect_caustic) {
    const burgers::CauchyCurve c =
        forced ? curve : burgers::CauchyCurve::on_level(0.0, xs.min, xs.max, initial, std::max<std::size_t>(xs.n, 2));
    const burgers::BurgersSolution sol(f, c, solver);
    const auto cp = burgers::caustic_detect(sol, forced ? u0 : 0.0, us.max, caustic_u_tol);
    Csv cc = ctx.csv("caustic.csv", {"u", "x"});
    ctx.holds("caustic found", cp.has_value());
    if (cp) {
      cc.row({cp->u, cp->x});
      ctx.results["caustic"] = {{"u", cp->u}, {"x", cp->x}};
      if (expected_u_star) ctx.at_most("|u* - expected|", std::abs(cp->u - *expected_u_star), caustic_tolerance);
      if (expected_x_star) ctx.at_most("|x* - expected|", std::abs(cp->x - *expected_x_star), caustic_tolerance);
    }
  }
}

// ---------------------------------------------------------------- caustic

void run_caustic(Params& p, Context& ctx) {
  const Expression l0 = p.expression("data", "L0", var_mask({Var::X}));
  const Expression sigma = p.expression("data", "sigma", var_mask({Var::U, Var::X, Var::P}), "0");
  const double u0 = p.number("data", "u0", 0.0);
  const double x_min = p.number("data", "x_min", -1.0);
  const double x_max = p.number("data", "x_max", 1.0);
  const std::size_t samples = p.count("data", "samples", 65, 2);
  const double u_max = p.number("search", "u_max");
  const double u_tol = p.number("search", "u_tol", 1e-8);
  const bool expect = p.flag("check", "expect_caustic", true);
  const std::optional<double> expected_u = p.optional_number("check", "expected_u_star");
  const std::optional<double> expected_x = p.optional_number("check", "expected_x_star");
  const double tolerance = p.number("check", "tolerance", 1e-6);
  const burgers::SolverOptions solver = read_solver(p);
  p.finish();

  const burgers::Forcing f = leaf_forcing(sigma, {u0, u_max, 2}, {x_min, x_max, 2});
  const burgers::BurgersSolution sol(f, burgers::CauchyCurve::on_level(u0, x_min, x_max, of_x(l0), samples), solver);
  const auto cp = burgers::caustic_detect(sol, u0, u_max, u_tol);
  Csv out = ctx.csv("caustic.csv", {"u", "x"});
  if (cp) {
    out.row({cp->u, cp->x});
    ctx.results["caustic"] = {{"u", cp->u}, {"x", cp->x}};
  } else {
    ctx.results["caustic"] = nullptr;
  }
  if (!expect) {
    if (cp) {
      std::ostringstream os;
      os.precision(17);
      os << "caustic reached at (u, x) = (" << cp->u << ", " << cp->x << ")";
      throw Error(ErrorKind::CausticReached, os.str());
    }
    ctx.holds("no caustic", true);
    return;
  }
  ctx.holds("caustic found", cp.has_value());
  if (cp && expected_u) ctx.at_most("|u* - expected|", std::abs(cp->u - *expected_u), tolerance);
  if (cp && expected_x) ctx.at_most("|x* - expected|", std::abs(cp->x - *expected_x), tolerance);
}

// ---------------------------------------------------------------- dual-ode

void run_dual(Params& p, Context& ctx) {
  const Expression sigma = p.expression("data", "sigma", var_mask({Var::U, Var::X, Var::P}), "0");
  burgers::DualOdeRequest req;
  req.basepoint = p.number("data", "basepoint", 0.0);
  const std::vector<double> tu = p.numbers("data", "targets_u");
  const std::vector<double> tx = p.numbers("data", "targets_x");
  const congruence::Axis as = read_axis(p, "data", "a", -1.0, 1.0, 11);
  req.h = p.number("data", "h", 1e-4);
  const std::optional<double> tolerance = p.optional_number("check", "sigma_star_tolerance");
  const burgers::SolverOptions solver = read_solver(p);
  p.finish();
  if (tu.size() != tx.size()) throw ScenarioError({0, 0}, "targets_u and targets_x differ in length");
  for (std::size_t i = 0; i < tu.size(); ++i) req.targets.push_back({tu[i], tx[i]});
  for (std::size_t i = 0; i < as.n; ++i) req.a_values.push_back(as.at(i));

  double u_lo = req.basepoint, u_hi = req.basepoint;
  for (const double u : tu) u_lo = std::min(u_lo, u), u_hi = std::max(u_hi, u);
  const burgers::Forcing f = leaf_forcing(sigma, {u_lo, u_hi, 2}, {as.min, as.max, 2});
  const burgers::DualSamples dual = burgers::dual_ode_extract(f, req, solver);
  Csv out = ctx.csv("dual.csv", {"u", "x", "a", "b", "slope", "sigma_star"});
  for (const auto& s : dual.samples) out.row({s.u, s.x, s.a, s.b, s.slope, s.sigma_star});
  const burgers::Forcing fit = dual.constant_forcing();
  ctx.results["samples"] = dual.samples.size();
  ctx.results["max_abs_sigma_star"] = dual.max_abs();
  ctx.results["fitted_coefficients"] = {fit.coefficient(0, 0, 0), fit.coefficient(1, 0, 0), fit.coefficient(2, 0, 0),
                                        fit.coefficient(3, 0, 0)};
  if (tolerance) ctx.at_most("max |sigma*|", dual.max_abs(), *tolerance);
}

// ---------------------------------------------------------------- circle-example

void run_circle(Params& p, Context& ctx) {
  const std::size_t samples = p.count("data", "samples", 200, 2);
  const std::vector<double> point = p.numbers("data", "point", std::vector<double>{2.0, 0.0, 1.0});
  const double conic_scale = p.number("data", "conic_scale", 2.0);
  const double locus_tolerance = p.number("check", "locus_tolerance", 1e-10);
  p.finish();
  if (point.size() != 3) throw ScenarioError({0, 0}, "point needs three homogeneous coordinates");
  if (!(conic_scale > 1.0)) throw ScenarioError({0, 0}, "conic_scale must exceed 1 (conic outside the circle)");

  const auto lines = burgers::circle_tangent_lines(projlin::HPoint{point[0], point[1], point[2]});
  json tangents = json::array();
  for (const auto& l : lines) tangents.push_back({l[0], l[1], l[2]});
  ctx.results["tangent_lines"] = tangents;

  const burgers::BurgersSurface surface = burgers::surface_from_caustic(burgers::dual_circle(samples));
  Csv out = ctx.csv("caustic.csv", {"s", "x", "y", "z", "p", "q", "r"});
  double worst = 0.0;
  for (std::size_t i = 0; i < surface.caustic->samples.size(); ++i) {
    const auto& f = surface.caustic->samples[i];
    const auto r = burgers::circle_locus_residual(f);
    worst = std::max({worst, std::abs(r.circle), std::abs(r.incidence), std::abs(r.dual)});
    out.row({surface.caustic->parameters[i], f.point[0], f.point[1], f.point[2], f.line[0], f.line[1], f.line[2]});
  }
  ctx.results["sheets"] = surface.sheets.size();
  ctx.results["max_locus_residual"] = worst;
  ctx.at_most("caustic locus residual", worst, locus_tolerance);

  // Cauchy data on x^2 + y^2 = c z^2: at angle s the datum is the circle's
  // tangent line touching at angle s + acos(1 / sqrt(c)).
  const double r = std::sqrt(conic_scale), offset = std::acos(1.0 / r);
  burgers::ProjectiveCauchyCurve cauchy;
  cauchy.point = [r](double s) { return std::array<double, 3>{r * std::cos(s), r * std::sin(s), 1.0}; };
  cauchy.line = [offset](double s) { return std::array<double, 3>{std::cos(s + offset), std::sin(s + offset), -1.0}; };
  cauchy.s_min = 0.0;
  cauchy.s_max = 2.0 * std::numbers::pi;
  cauchy.samples = samples;
  const double margin = burgers::transversality_check(cauchy);
  ctx.results["transversality_margin"] = margin;
  ctx.at_least("transversality margin", margin, std::numeric_limits<double>::min());
}

// ---------------------------------------------------------------- congruence

void run_congruence(Params& p, Context& ctx) {
  const unsigned xy = var_mask({Var::X, Var::Y});
  const unsigned uxyp = var_mask({Var::U, Var::X, Var::Y, Var::P});
  const Expression section = p.expression("data", "section", xy, "0");
  const Expression l0 = p.expression("data", "L0", xy);
  const Expression m0 = p.expression("data", "M0", xy);
  const Expression sigma = p.expression("data", "sigma", uxyp, "0");
  const Expression sigma_tilde = p.expression("data", "sigma_tilde", uxyp, "0");
  congruence::ScatteringData data;
  data.x_min = p.number("data", "x_min");
  data.x_max = p.number("data", "x_max");
  data.y_min = p.number("data", "y_min");
  data.y_max = p.number("data", "y_max");
  data.curve_samples = p.count("data", "curve_samples", 65, 2);

  congruence::Grid4 grid;
  grid.u = read_axis(p, "domain", "u", {}, {}, 11);
  grid.x = read_axis(p, "domain", "x", {}, {}, 11);
  grid.y = read_axis(p, "domain", "y", {}, {}, 11);
  grid.t = read_axis(p, "domain", "t", -1.0, 1.0, 5);
  const std::size_t slice_checks = p.count("domain", "slice_checks", 11);

  congruence::ShearOptions shear;
  shear.h = p.number("shear", "h", shear.h);
  shear.richardson = p.flag("shear", "richardson", shear.richardson);
  shear.metric_scale = p.number("shear", "metric_scale", shear.metric_scale);
  shear.min_relative_det = p.number("shear", "min_relative_det", shear.min_relative_det);
  const double twist = p.number("shear", "twist", 0.0);

  const bool expect_shearfree = p.flag("check", "expect_shearfree", true);
  const double shear_tolerance = p.number("check", "shear_tolerance", 1e-6);
  const double frobenius_tolerance = p.number("check", "frobenius_tolerance", 1e-6);
  const double roundtrip_tolerance = p.number("check", "roundtrip_tolerance", 1e-9);
  const double null_tolerance = p.number("check", "null_tolerance", 1e-14);
  const double residual_h = p.number("check", "residual_h", 1e-3);
  const std::optional<double> residual_tolerance = p.optional_number("check", "residual_tolerance");
  const bool foliation_check = p.flag("check", "foliation_check", true);
  const burgers::SolverOptions solver = read_solver(p);
  p.finish();

  auto env = [](double u, double x, double y, double slope) {
    return expr::Env{.u = u, .x = x, .y = y, .p = slope, .s = 0.0};
  };
  data.section = [section, env](double x, double y) { return section.eval(env(0, x, y, 0)); };
  data.slope_l = [l0, env](double x, double y) { return l0.eval(env(0, x, y, 0)); };
  data.slope_m = [m0, env](double x, double y) { return m0.eval(env(0, x, y, 0)); };

  std::vector<std::array<double, 3>> probes;
  for (const double u : {grid.u.min, grid.u.max}) {
    for (const double a : {grid.x.min, grid.x.max}) {
      for (const double b : {grid.y.min, grid.y.max}) probes.push_back({u, a, b});
    }
  }
  // L-equation coefficients take (u, x, y); M-equation ones (u, y, x).
  auto build = [&](const Expression& e, bool swapped) {
    if (e.print() == "0") return burgers::Forcing{};
    return burgers::Forcing::from_slope_function(
        [e, env, swapped](double u, double pos, double label, double slope) {
          return swapped ? e.eval(env(u, label, pos, slope)) : e.eval(env(u, pos, label, slope));
        },
        probes);
  };
  const congruence::Box3 box{grid.u.min, grid.u.max, grid.x.min, grid.x.max, grid.y.min, grid.y.max};
  const congruence::KappaField kappa =
      congruence::solve_scattering(data, build(sigma, false), build(sigma_tilde, true), box, solver, slice_checks);
  ctx.results["transversality_margin"] = kappa.transversality_margin();

  const congruence::Grid3 g3{grid.u, grid.x, grid.y};
  const auto ls = kernels::field_sweep([&](double u, double x, double y) { return kappa.L(u, x, y); }, g3,
                                       kernels::Execution::Parallel);
  const auto ms = kernels::field_sweep([&](double u, double x, double y) { return kappa.M(u, x, y); }, g3,
                                       kernels::Execution::Parallel);
  {
    Csv lc = ctx.csv("L.csv", {"u", "x", "y", "L"});
    Csv mc = ctx.csv("M.csv", {"u", "x", "y", "M"});
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const double y = grid.y.at(i % grid.y.n), x = grid.x.at((i / grid.y.n) % grid.x.n),
                   u = grid.u.at(i / (grid.y.n * grid.x.n));
      lc.row({u, x, y, ls[i]});
      mc.row({u, x, y, ms[i]});
    }
  }
  if (residual_tolerance) {
    double worst = 0.0;
    for (const auto eq : {kernels::Equation::L, kernels::Equation::M}) {
      for (const double r : kernels::residual_sweep(kappa, eq, g3, residual_h, kernels::Execution::Parallel)) {
        worst = std::max(worst, std::abs(r));
      }
    }
    ctx.results["max_pde_residual"] = worst;
    ctx.at_most("max per-slice pde residual", worst, *residual_tolerance);
  }

  congruence::Congruence c =
      congruence::build_congruence(kappa, foliation_check ? std::optional{grid} : std::nullopt, shear.h);
  const congruence::RoundTrip rt = congruence::scattering_roundtrip(c, data, grid.x, grid.y);
  ctx.results["roundtrip"] = {{"coordinate_error", rt.max_coordinate_error},
                              {"slope_error", rt.max_slope_error},
                              {"chart_error", rt.max_chart_error}};
  ctx.at_most("scattering round trip",
              std::max({rt.max_coordinate_error, rt.max_slope_error, rt.max_chart_error}), roundtrip_tolerance);

  double worst_null = 0.0;
  for (std::size_t i = 0; i < g3.size(); ++i) {
    const double y = grid.y.at(i % grid.y.n), x = grid.x.at((i / grid.y.n) % grid.x.n),
                 u = grid.u.at(i / (grid.y.n * grid.x.n));
    worst_null = std::max(worst_null, std::abs(klein::det2(c.tangent(u, x, y))));
  }
  ctx.results["max_abs_det_tangent"] = worst_null;
  ctx.at_most("null tangents |det k|", worst_null, null_tolerance);

  if (twist != 0.0) c = congruence::twisted(c, twist);
  const congruence::ShearReport report = congruence::shear_report(c, grid, shear);
  {
    Csv sc = ctx.csv("shear.csv", {"u", "x", "y", "t", "shear_m", "shear_mp", "shear_norm", "frobenius_m",
                                   "frobenius_mp", "det_jacobian"});
    for (const auto& s : report.samples) {
      sc.row({s.u, s.x, s.y, s.t, s.shear_m, s.shear_mp, s.shear_norm, s.frobenius_m, s.frobenius_mp,
              s.det_jacobian});
    }
  }
  ctx.results["max_shear"] = report.max_shear;
  ctx.results["max_frobenius"] = report.max_frobenius;
  ctx.results["grid_points"] = report.samples.size();
  if (expect_shearfree) {
    ctx.at_most("max shear norm", report.max_shear, shear_tolerance);
    ctx.at_most("max Frobenius norm", report.max_frobenius, frobenius_tolerance);
  } else {
    ctx.at_least("max shear norm", report.max_shear, shear_tolerance);
    ctx.at_least("max Frobenius norm", report.max_frobenius, frobenius_tolerance);
  }
}

// ---------------------------------------------------------------- dispatch

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::SyntaxError:
    case ErrorKind::ScenarioError:
      return kParseError;
    case ErrorKind::CausticReached:
    case ErrorKind::BlowUp:
    case ErrorKind::FoliationFailure:
    case ErrorKind::IllConditioned:
      return kNumericFailure;
    default:
      return kPreconditionViolation;
  }
}

std::string precondition_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::TransversalityViolation:
      return "Cauchy transversality: the datum line must differ from the tangent line of the Cauchy curve";
    case ErrorKind::ForcingDegree:
      return "cubic forcing: sigma must be a polynomial of degree at most three in the slope";
    case ErrorKind::NotIncident:
      return "incidence: each datum line must pass through its curve point";
    case ErrorKind::DegenerateCurve:
      return "immersed curve: the Cauchy or dual curve must have a nonvanishing tangent";
    case ErrorKind::EvalError:
      return "expression domain: every expression must be defined on the sampled region";
    case ErrorKind::TangentAtInfinity:
    case ErrorKind::ChartBoundary:
    case ErrorKind::TangentDirection:
    case ErrorKind::NoChartIntersection:
      return "transverse geodesics: every geodesic must leave scri inside the coordinate chart";
    default:
      return "well-formed input";
  }
}

}  // namespace

std::string_view to_string(Kind k) {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "unknown";
}

std::optional<Kind> kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kKinds) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

ScenarioError::ScenarioError(Location where, const std::string& what)
    : Error(ErrorKind::ScenarioError, where.line ? where_string(where) + ": " + what : what), where_(where) {}

Document parse_document(std::string_view text) {
  Document doc;
  std::string section;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string content = trim(line);
    if (content.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::size_t indent = line.find_first_not_of(" \t");
    if (content.front() == '[') {
      if (content.back() != ']') throw ScenarioError({line_no, indent + 1}, "unterminated section header");
      section = trim(std::string_view(content).substr(1, content.size() - 2));
      if (!is_identifier(section)) throw ScenarioError({line_no, indent + 2}, "invalid section name '" + section + "'");
    } else {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ScenarioError({line_no, indent + 1}, "expected 'key = value' or '[section]'");
      }
      const std::string key = trim(line.substr(0, eq));
      if (!is_identifier(key)) throw ScenarioError({line_no, indent + 1}, "invalid key '" + key + "'");
      const std::string_view rest = line.substr(eq + 1);
      const std::size_t lead = rest.find_first_not_of(" \t");
      const std::string value = trim(rest);
      if (value.empty()) throw ScenarioError({line_no, eq + 2}, "missing value for '" + key + "'");
      for (const Entry& e : doc.entries) {
        if (e.section == section && e.key == key) {
          throw ScenarioError({line_no, indent + 1}, "duplicate key '" + key + "' (first at line " +
                                                         std::to_string(e.key_at.line) + ")");
        }
      }
      doc.entries.push_back({section, key, value, {line_no, indent + 1}, {line_no, eq + 2 + lead}});
    }
    if (end == text.size()) break;
  }
  return doc;
}

Outcome run_text(std::string_view text, const std::string& origin, const RunOptions& opts) {
  Outcome outcome;
  json& summary = outcome.summary;
  summary["scenario"] = origin;
  Context ctx;
  ctx.opts = opts;
  std::optional<Params> params;
  Document doc;
  const int threads = kernels::configure_threads(opts.threads);

  auto record_error = [&](int code, const std::string& kind, const std::string& message) {
    outcome.exit_code = code;
    outcome.message = message;
    summary["error"] = {{"kind", kind}, {"message", message}};
  };

  try {
    if (opts.out_dir) fs::create_directories(*opts.out_dir);
    doc = parse_document(text);
    params.emplace(doc);
    Location at;
    const auto kind_text = params->raw("", "kind", &at);
    if (!kind_text) throw ScenarioError({0, 0}, "missing required key kind");
    const auto kind = kind_from_string(*kind_text);
    if (!kind) throw ScenarioError(at, "unknown kind '" + *kind_text + "'");
    if (!opts.allowed_kinds.empty() &&
        std::find(opts.allowed_kinds.begin(), opts.allowed_kinds.end(), *kind) == opts.allowed_kinds.end()) {
      throw ScenarioError(at, "scenario kind '" + *kind_text + "' does not match this subcommand");
    }
    summary["kind"] = *kind_text;
    params->text("", "kind");
    params->text("", "description", std::string{});

    switch (*kind) {
      case Kind::BurgersFlat: run_burgers(*params, ctx, false); break;
      case Kind::BurgersForced: run_burgers(*params, ctx, true); break;
      case Kind::Caustic: run_caustic(*params, ctx); break;
      case Kind::DualOde: run_dual(*params, ctx); break;
      case Kind::CircleExample: run_circle(*params, ctx); break;
      case Kind::Congruence: run_congruence(*params, ctx); break;
    }
    const bool all = std::all_of(ctx.checks.begin(), ctx.checks.end(), [](const Check& c) { return c.pass; });
    outcome.exit_code = all ? kPass : kChecksFailed;
    outcome.message = all ? "all checks passed" : "some checks failed";
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    std::string message = e.what();
    if (code == kPreconditionViolation) message = "precondition violated (" + precondition_name(e.kind()) + "): " + message;
    record_error(code, std::string(shearfree::to_string(e.kind())), message);
  } catch (const std::exception& e) {
    record_error(kNumericFailure, "Internal", e.what());
  }

  if (params) summary["inputs"] = params->echoed();
  summary["results"] = ctx.results;
  json checks = json::array();
  for (const Check& c : ctx.checks) {
    checks.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"relation", c.relation}, {"pass", c.pass}});
  }
  summary["checks"] = checks;
  summary["artifacts"] = ctx.artifacts;
  summary["threads"] = threads;
  summary["exit_code"] = outcome.exit_code;
  summary["pass"] = outcome.exit_code == kPass;

  if (opts.out_dir) {
    std::error_code ec;
    fs::create_directories(*opts.out_dir, ec);
    std::ofstream out(*opts.out_dir / "summary.json", std::ios::binary);
    if (out) out << summary.dump(2) << '\n';
  }
  return outcome;
}

Outcome run_file(const fs::path& path, const RunOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    Outcome o;
    o.exit_code = kParseError;
    o.message = "cannot read scenario " + path.string();
    o.summary = {{"scenario", path.string()}, {"error", {{"kind", "ScenarioError"}, {"message", o.message}}},
                 {"exit_code", o.exit_code}, {"pass", false}};
    return o;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return run_text(ss.str(), path.string(), opts);
}

}  // namespace shearfree::scenario
