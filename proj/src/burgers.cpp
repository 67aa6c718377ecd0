#include "shearfree/burgers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "shearfree/error.hpp"

namespace shearfree::burgers {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string fmt_point(double u, double x) {
  std::ostringstream os;
  os.precision(17);
  os << "(u, x) = (" << u << ", " << x << ")";
  return os.str();
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

CharState straight(const CharState& s, double u_end) {
  return {u_end, s.x + (u_end - s.u) * s.p, s.p};
}

void check_bound(const CharState& s, double bound) {
  if (!std::isfinite(s.x) || !std::isfinite(s.p) || std::abs(s.x) > bound || std::abs(s.p) > bound) {
    std::ostringstream os;
    os << "characteristic left the state bound " << bound << " at u = " << s.u;
    throw Error(ErrorKind::BlowUp, os.str());
  }
}

CharState rk4_step(const Forcing& f, const CharState& s, double h) {
  const double u = s.u, x = s.x, p = s.p;
  const double k1x = p, k1p = f(u, x, p);
  const double k2x = p + 0.5 * h * k1p, k2p = f(u + 0.5 * h, x + 0.5 * h * k1x, p + 0.5 * h * k1p);
  const double k3x = p + 0.5 * h * k2p, k3p = f(u + 0.5 * h, x + 0.5 * h * k2x, p + 0.5 * h * k2p);
  const double k4x = p + h * k3p, k4p = f(u + h, x + h * k3x, p + h * k3p);
  return {u + h, x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
          p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)};
}

std::size_t step_count(double span, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::IllConditioned, "integration step must be positive");
  return static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(span) / step - 1e-9)));
}

double flat_foot(const ScalarFn& initial, double u, double x, const SolverOptions& opts) {
  if (u == 0.0) return x;
  auto g = [&](double s) { return s + u * initial(s) - x; };
  const double centre = x - u * initial(x);
  const std::size_t n = std::max<std::size_t>(opts.scan_samples, 2);

  double radius = opts.search_radius;
  for (int widen = 0; widen < 8; ++widen, radius *= 4.0) {
    std::size_t changes = 0;
    double lo = 0.0, hi = 0.0, g_lo = 0.0, g_hi = 0.0;
    double prev_s = centre - radius;
    double prev_g = g(prev_s);
    for (std::size_t i = 1; i <= n; ++i) {
      const double s = centre - radius + 2.0 * radius * static_cast<double>(i) / static_cast<double>(n);
      const double gs = g(s);
      if ((prev_g < 0.0) != (gs < 0.0)) {
        ++changes;
        lo = prev_s, hi = s, g_lo = prev_g, g_hi = gs;
      }
      prev_s = s;
      prev_g = gs;
    }
    if (changes > 1) {
      throw Error(ErrorKind::CausticReached, "several characteristics reach " + fmt_point(u, x));
    }
    if (changes == 0) continue;

    const double root = bracketed_root(g, lo, hi, g_lo, g_hi, opts.max_iterations);
    const double dh = 1e-5 * std::max(1.0, std::abs(root));
    const double slope = 1.0 + u * (initial(root + dh) - initial(root - dh)) / (2.0 * dh);
    if (!(slope > 0.0)) {
      throw Error(ErrorKind::CausticReached,
                  "characteristic map folded (dx/dx0 <= 0) at " + fmt_point(u, x));
    }
    return root;
  }
  throw Error(ErrorKind::CausticReached, "no characteristic of the initial data reaches " + fmt_point(u, x));
}

}  // namespace

// ---------------------------------------------------------------- Forcing

Forcing::Forcing(std::span<const CoefficientFn> coefficients) {
  if (coefficients.size() > 4) {
    throw Error(ErrorKind::ForcingDegree,
                "forcing must be at most cubic in the slope; got " + std::to_string(coefficients.size()) +
                    " coefficients");
  }
  std::copy(coefficients.begin(), coefficients.end(), coefficients_.begin());
}

Forcing::Forcing(std::initializer_list<CoefficientFn> coefficients)
    : Forcing(std::span<const CoefficientFn>(coefficients.begin(), coefficients.size())) {}

Forcing Forcing::constant(std::initializer_list<double> coefficients) {
  return constant(std::span<const double>(coefficients.begin(), coefficients.size()));
}

Forcing Forcing::constant(std::span<const double> coefficients) {
  if (coefficients.size() > 4) {
    throw Error(ErrorKind::ForcingDegree,
                "forcing must be at most cubic in the slope; got " + std::to_string(coefficients.size()) +
                    " coefficients");
  }
  Forcing f;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const double c = coefficients[i];
    if (c != 0.0) f.coefficients_[i] = [c](double, double, double) { return c; };
  }
  return f;
}

Forcing Forcing::from_slope_function(SlopeFn sigma, std::span<const std::array<double, 3>> probes) {
  for (const auto& [u, pos, label] : probes) {
    double v[5];
    double scale = 1.0;
    for (int k = 0; k < 5; ++k) {
      v[k] = sigma(u, pos, label, static_cast<double>(k - 2));
      scale = std::max(scale, std::abs(v[k]));
    }
    const double fourth = v[0] - 4.0 * v[1] + 6.0 * v[2] - 4.0 * v[3] + v[4];
    if (!(std::abs(fourth) <= 1e-9 * scale)) {
      std::ostringstream os;
      os << "sigma is not cubic in the slope: fourth difference " << fourth << " at (u, pos, label) = ("
         << u << ", " << pos << ", " << label << ")";
      throw Error(ErrorKind::ForcingDegree, os.str());
    }
  }
  // Cubic through p = -1, 0, 1, 2.
  auto fit = std::make_shared<SlopeFn>(std::move(sigma));
  auto coef = [fit](std::size_t i, double u, double pos, double label) {
    const SlopeFn& s = *fit;
    const double fm = s(u, pos, label, -1.0), f0 = s(u, pos, label, 0.0);
    const double f1 = s(u, pos, label, 1.0), f2 = s(u, pos, label, 2.0);
    const double c2 = 0.5 * (f1 + fm) - f0;
    const double a = 0.5 * (f1 - fm);
    const double b = 0.5 * (f2 - f0 - 4.0 * c2);
    const double c3 = (b - a) / 3.0;
    const double c1 = a - c3;
    const double c[4] = {f0, c1, c2, c3};
    return c[i];
  };
  Forcing f;
  for (std::size_t i = 0; i < 4; ++i) {
    f.coefficients_[i] = [coef, i](double u, double pos, double label) { return coef(i, u, pos, label); };
  }
  return f;
}

double Forcing::operator()(double u, double pos, double p) const {
  double acc = 0.0;
  for (std::size_t i = 4; i-- > 0;) {
    acc *= p;
    if (coefficients_[i]) acc += coefficients_[i](u, pos, label_);
  }
  return acc;
}

double Forcing::coefficient(std::size_t i, double u, double pos) const {
  if (i >= 4 || !coefficients_[i]) return 0.0;
  return coefficients_[i](u, pos, label_);
}

bool Forcing::is_zero() const noexcept {
  return std::none_of(coefficients_.begin(), coefficients_.end(),
                      [](const CoefficientFn& c) { return static_cast<bool>(c); });
}

Forcing Forcing::with_label(double label) const {
  Forcing f = *this;
  f.label_ = label;
  return f;
}

// ---------------------------------------------------------------- curves

CauchyCurve CauchyCurve::on_level(double u0, double x_min, double x_max, ScalarFn initial,
                                  std::size_t samples) {
  CauchyCurve c;
  c.gamma = [=](double s) { return std::array<double, 2>{u0, x_min + s * (x_max - x_min)}; };
  c.slope = [=, initial = std::move(initial)](double s) { return initial(x_min + s * (x_max - x_min)); };
  c.samples = samples;
  return c;
}

double CauchyCurve::s_at(std::size_t i) const {
  return samples < 2 ? 0.0 : static_cast<double>(i) / static_cast<double>(samples - 1);
}

// ---------------------------------------------------------------- roots

double bracketed_root(const std::function<double(double)>& g, double lo, double hi, double g_lo,
                      double g_hi, std::size_t max_iterations) {
  double a = lo, b = hi, fa = g_lo, fb = g_hi;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw Error(ErrorKind::IllConditioned, "bracketed_root: endpoints do not bracket a root");
  }
  const double floor = 1e-3 * kEps * std::max({1.0, std::abs(lo), std::abs(hi)});
  double c = a, fc = fa, d = b - a, e = d;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a, fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b, b = c, c = a;
      fa = fb, fb = fc, fc = fa;
    }
    const double tol = 2.0 * kEps * std::abs(b) + floor;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b, fa = fb;
    b += std::abs(d) > tol ? d : std::copysign(tol, m);
    fb = g(b);
  }
  return b;
}

// ---------------------------------------------------------------- integration

std::vector<CharState> characteristic_trace(const Forcing& f, double u0, double x0, double p0,
                                            double u_end, double step, double state_bound) {
  const std::size_t n = step_count(u_end - u0, step);
  const double h = (u_end - u0) / static_cast<double>(n);
  std::vector<CharState> out;
  out.reserve(n + 1);
  CharState s{u0, x0, p0};
  check_bound(s, state_bound);
  out.push_back(s);
  for (std::size_t i = 1; i <= n; ++i) {
    s = rk4_step(f, s, h);
    if (i == n) s.u = u_end;
    check_bound(s, state_bound);
    out.push_back(s);
  }
  return out;
}

CharState integrate_characteristic(const Forcing& f, CharState start, double u_end,
                                   const SolverOptions& opts) {
  if (u_end == start.u) return start;
  if (f.is_zero()) return straight(start, u_end);
  const std::size_t n = step_count(u_end - start.u, opts.step);
  const double h = (u_end - start.u) / static_cast<double>(n);
  CharState s = start;
  for (std::size_t i = 1; i <= n; ++i) {
    s = rk4_step(f, s, h);
    check_bound(s, opts.state_bound);
  }
  s.u = u_end;
  return s;
}

// ---------------------------------------------------------------- flat solver

double eval_flat(const ScalarFn& initial, double u, double x, const SolverOptions& opts) {
  return initial(flat_foot(initial, u, x, opts));
}

double transport_eval(const ScalarFn& initial, double u, double x, const SolverOptions& opts) {
  return flat_foot(initial, u, x, opts);
}

// ---------------------------------------------------------------- transversality

double transversality_check(const CauchyCurve& curve) {
  const std::size_t n = curve.samples;
  if (n < 2) throw Error(ErrorKind::DegenerateCurve, "Cauchy curve needs at least two samples");
  const double ds = 1.0 / static_cast<double>(n - 1);
  const double h = std::min(1e-6, 0.25 * ds);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = curve.s_at(i);
    const double s_lo = std::max(0.0, s - h), s_hi = std::min(1.0, s + h);
    const auto g_lo = curve.gamma(s_lo);
    const auto g_hi = curve.gamma(s_hi);
    const double du = (g_hi[0] - g_lo[0]) / (s_hi - s_lo);
    const double dx = (g_hi[1] - g_lo[1]) / (s_hi - s_lo);
    const double t_norm = std::hypot(du, dx);
    if (!(t_norm > 1e-12)) {
      throw Error(ErrorKind::DegenerateCurve, "Cauchy curve tangent vanishes at s = " + std::to_string(s));
    }
    const double l = curve.slope(s);
    const double sine = std::abs(du * l - dx) / (t_norm * std::hypot(1.0, l));
    margin = std::min(margin, sine);
  }
  return margin;
}

double transversality_check(const ProjectiveCauchyCurve& curve) {
  using V3 = std::array<double, 3>;
  auto cross = [](const V3& a, const V3& b) {
    return V3{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  };
  auto nrm = [](const V3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); };
  if (curve.samples < 2) throw Error(ErrorKind::DegenerateCurve, "Cauchy curve needs at least two samples");
  const double span = curve.s_max - curve.s_min;
  const double h = 1e-6 * std::max(1.0, std::abs(span));
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.samples; ++i) {
    const double s = curve.s_min + span * static_cast<double>(i) / static_cast<double>(curve.samples - 1);
    const V3 pt = curve.point(s);
    const V3 a = curve.point(s - h), b = curve.point(s + h);
    const V3 d{(b[0] - a[0]) / (2 * h), (b[1] - a[1]) / (2 * h), (b[2] - a[2]) / (2 * h)};
    const V3 tangent = cross(pt, d);
    const V3 datum = curve.line(s);
    const double tn = nrm(tangent), dn = nrm(datum), pn = nrm(pt);
    if (!(tn > 1e-12 * pn * nrm(d)) || !(dn > 0.0)) {
      throw Error(ErrorKind::DegenerateCurve, "tangent line undefined at s = " + std::to_string(s));
    }
    const double incidence = (pt[0] * datum[0] + pt[1] * datum[1] + pt[2] * datum[2]) / (pn * dn);
    if (std::abs(incidence) > 1e-9) {
      throw Error(ErrorKind::NotIncident, "datum line does not pass through the curve at s = " + std::to_string(s));
    }
    margin = std::min(margin, nrm(cross(tangent, datum)) / (tn * dn));
  }
  return margin;
}

// ---------------------------------------------------------------- forced solver

double eval_forced(const Forcing& f, const CauchyCurve& curve, double u, double x,
                   const SolverOptions& opts) {
  const std::size_t n = curve.samples;
  if (n < 2) throw Error(ErrorKind::DegenerateCurve, "Cauchy curve needs at least two samples");
  auto state_at = [&](double s) {
    const auto g = curve.gamma(s);
    return integrate_characteristic(f, CharState{g[0], g[1], curve.slope(s)}, u, opts);
  };
  std::vector<double> gap(n);
  for (std::size_t i = 0; i < n; ++i) gap[i] = state_at(curve.s_at(i)).x - x;

  const int orientation = sign_of(gap[1] - gap[0]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (orientation == 0 || sign_of(gap[i + 1] - gap[i]) != orientation) {
      throw Error(ErrorKind::CausticReached,
                  "characteristics of the Cauchy data cross before reaching " + fmt_point(u, x));
    }
  }
  std::size_t bracket = n;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (gap[i] == 0.0) return state_at(curve.s_at(i)).p;
    if ((gap[i] < 0.0) != (gap[i + 1] < 0.0)) {
      bracket = i;
      break;
    }
  }
  if (gap[n - 1] == 0.0) return state_at(1.0).p;
  if (bracket == n) {
    throw Error(ErrorKind::CausticReached,
                fmt_point(u, x) + " is not reached by the characteristics of the Cauchy data");
  }
  auto g = [&](double s) { return state_at(s).x - x; };
  const double s_star = bracketed_root(g, curve.s_at(bracket), curve.s_at(bracket + 1), gap[bracket],
                                       gap[bracket + 1], opts.max_iterations);
  return state_at(s_star).p;
}

BurgersSolution::BurgersSolution(Forcing forcing, CauchyCurve curve, SolverOptions opts)
    : forcing_(std::move(forcing)), curve_(std::move(curve)), opts_(opts) {}

double BurgersSolution::eval(double u, double x) const { return eval_forced(forcing_, curve_, u, x, opts_); }

CharState BurgersSolution::characteristic(double s, double u) const {
  const auto g = curve_.gamma(s);
  return integrate_characteristic(forcing_, CharState{g[0], g[1], curve_.slope(s)}, u, opts_);
}

// ---------------------------------------------------------------- caustics

std::optional<CausticPoint> caustic_detect(const BurgersSolution& sol, double u_min, double u_max,
                                           double u_tol) {
  const CauchyCurve& curve = sol.curve();
  const SolverOptions& opts = sol.options();
  const std::size_t n = curve.samples;
  if (n < 2) throw Error(ErrorKind::DegenerateCurve, "Cauchy curve needs at least two samples");

  std::vector<CharState> level(n);
  for (std::size_t i = 0; i < n; ++i) level[i] = sol.characteristic(curve.s_at(i), u_min);
  std::vector<int> orientation(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    orientation[i] = sign_of(level[i + 1].x - level[i].x);
    if (orientation[i] == 0) return CausticPoint{u_min, level[i].x};
  }

  const std::size_t steps = step_count(u_max - u_min, opts.step);
  const double du = (u_max - u_min) / static_cast<double>(steps);
  std::optional<CausticPoint> best;
  for (std::size_t k = 1; k <= steps && !best; ++k) {
    const double u_next = k == steps ? u_max : u_min + du * static_cast<double>(k);
    std::vector<CharState> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = integrate_characteristic(sol.forcing(), level[i], u_next, opts);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (sign_of(next[i + 1].x - next[i].x) == orientation[i]) continue;
      // Bisect in u between the two levels.
      // Bisect in u between the two levels; `near` keeps the ordering.
      double near = level[i].u, far = u_next;
      CharState a = level[i], b = level[i + 1];
      while (std::abs(far - near) > u_tol) {
        const double mid = 0.5 * (near + far);
        const CharState am = integrate_characteristic(sol.forcing(), a, mid, opts);
        const CharState bm = integrate_characteristic(sol.forcing(), b, mid, opts);
        if (sign_of(bm.x - am.x) == orientation[i]) {
          near = mid;
          a = am;
          b = bm;
        } else {
          far = mid;
        }
      }
      const double u_star = 0.5 * (near + far);
      const CharState af = integrate_characteristic(sol.forcing(), a, u_star, opts);
      const CharState bf = integrate_characteristic(sol.forcing(), b, u_star, opts);
      const CausticPoint cp{u_star, 0.5 * (af.x + bf.x)};
      if (!best || std::abs(cp.u - u_min) < std::abs(best->u - u_min)) best = cp;
    }
    level = std::move(next);
  }
  return best;
}

double pde_residual(const std::function<double(double, double)>& field, const Forcing& f, double u,
                    double x, double h) {
  const double l = field(u, x);
  const double lu = (field(u + h, x) - field(u - h, x)) / (2.0 * h);
  const double lx = (field(u, x + h) - field(u, x - h)) / (2.0 * h);
  return lu + l * lx - f(u, x, l);
}

// ---------------------------------------------------------------- dual ODE

double DualSamples::max_abs() const {
  double m = 0.0;
  for (const DualSample& s : samples) m = std::max(m, std::abs(s.sigma_star));
  return m;
}

Forcing DualSamples::constant_forcing() const {
  if (samples.empty()) return Forcing{};
  Eigen::MatrixXd a(static_cast<Eigen::Index>(samples.size()), 4);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double s = samples[i].slope;
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = 1.0;
    a(r, 1) = s;
    a(r, 2) = s * s;
    a(r, 3) = s * s * s;
    rhs(r) = samples[i].sigma_star;
  }
  // Few distinct slopes leave the fit rank deficient; the minimum-norm
  // solution must then ignore the rounding-level singular values.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-10);
  cod.compute(a);
  const Eigen::Vector4d c = cod.solve(rhs);
  return Forcing::constant({c[0], c[1], c[2], c[3]});
}

DualSamples dual_ode_extract(const Forcing& f, const DualOdeRequest& request, const SolverOptions& opts) {
  DualSamples out;
  const double u0 = request.basepoint;
  const double h = request.h;
  for (const auto& [u, x] : request.targets) {
    const double span = u - u0;
    if (!(std::abs(span) > 1e-8)) {
      throw Error(ErrorKind::IllConditioned, "dual ODE target lies on the basepoint level u = " + std::to_string(u0));
    }
    auto incidence_b = [&](double a) {
      auto g = [&](double b) { return integrate_characteristic(f, CharState{u0, a, b}, u, opts).x - x; };
      const double guess = (x - a) / span;
      double width = std::max(1.0, std::abs(guess)) * 0.5;
      for (int k = 0; k < 60; ++k, width *= 2.0) {
        const double lo = guess - width, hi = guess + width;
        const double g_lo = g(lo), g_hi = g(hi);
        if ((g_lo < 0.0) != (g_hi < 0.0)) return bracketed_root(g, lo, hi, g_lo, g_hi, opts.max_iterations);
      }
      throw Error(ErrorKind::IllConditioned, "no solution of the family passes through " + fmt_point(u, x));
    };
    for (double a : request.a_values) {
      const double b0 = incidence_b(a);
      const double bp = incidence_b(a + h);
      const double bm = incidence_b(a - h);
      DualSample s;
      s.u = u;
      s.x = x;
      s.a = a;
      s.b = b0;
      s.slope = (bp - bm) / (2.0 * h);
      s.sigma_star = (bp - 2.0 * b0 + bm) / (h * h);
      out.samples.push_back(s);
    }
  }
  return out;
}

}  // namespace shearfree::burgers
