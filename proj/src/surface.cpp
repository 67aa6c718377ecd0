#include "shearfree/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shearfree/error.hpp"

namespace shearfree::burgers {
namespace {

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 scaled(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

Vec3 unit(const Vec3& a) { return scaled(a, 1.0 / norm(a)); }

Vec3 line_derivative(const DualCurve& c, double s) {
  if (c.derivative) return c.derivative(s);
  const double h = 1e-3 * std::max(1.0, std::abs(c.s_max - c.s_min)) / std::max<std::size_t>(c.samples, 1);
  auto central = [&](double step) {
    const Vec3 a = c.line(s - step), b = c.line(s + step);
    return Vec3{(b[0] - a[0]) / (2 * step), (b[1] - a[1]) / (2 * step), (b[2] - a[2]) / (2 * step)};
  };
  const Vec3 d1 = central(h), d2 = central(0.5 * h);
  return {(4 * d2[0] - d1[0]) / 3, (4 * d2[1] - d1[1]) / 3, (4 * d2[2] - d1[2]) / 3};
}

// Tangency point of gamma(s) with its envelope: gamma(s) x gamma'(s).
Vec3 envelope_point(const DualCurve& c, double s) {
  const Vec3 g = c.line(s);
  const Vec3 d = line_derivative(c, s);
  const Vec3 t = cross(g, d);
  if (!(norm(t) > 1e-12 * norm(g) * norm(d))) {
    throw Error(ErrorKind::DegenerateCurve, "dual curve is not immersed at s = " + std::to_string(s));
  }
  return t;
}

}  // namespace

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

BurgersSurface surface_from_caustic(const DualCurve& curve) {
  if (curve.samples < 2) throw Error(ErrorKind::DegenerateCurve, "dual curve needs at least two samples");
  BurgersSurface surface;

  auto chart = [curve](double s, double theta) {
    const Vec3 g = curve.line(s);
    const Vec3 t = unit(envelope_point(curve, s));
    Vec3 d{-g[1], g[0], 0.0};
    if (!(norm(d) > 1e-14 * norm(g))) {
      // gamma(s) is the line at infinity; use any other point of it.
      d = cross(g, t);
    }
    d = unit(d);
    const double c = std::cos(theta), sn = std::sin(theta);
    return FlagPoint{{c * t[0] + sn * d[0], c * t[1] + sn * d[1], c * t[2] + sn * d[2]}, g};
  };
  const double half_pi = 0.5 * std::numbers::pi;
  surface.sheets.push_back({"forward", 0.0, half_pi, chart});
  surface.sheets.push_back({"backward", half_pi, std::numbers::pi, chart});
  surface.ramification_thetas.push_back(half_pi);

  CausticCurve caustic;
  const double span = curve.s_max - curve.s_min;
  for (std::size_t i = 0; i < curve.samples; ++i) {
    const double s = curve.s_min + span * static_cast<double>(i) / static_cast<double>(curve.samples - 1);
    caustic.parameters.push_back(s);
    caustic.samples.push_back(FlagPoint{envelope_point(curve, s), curve.line(s)});
  }
  surface.caustic = std::move(caustic);
  return surface;
}

std::vector<projlin::HPoint> circle_tangent_lines(const projlin::HPoint& pt) {
  if (pt.size() != 3) throw Error(ErrorKind::DimensionMismatch, "circle_tangent_lines needs a point of P^2");
  const Vec3 p{pt[0], pt[1], pt[2]};
  // Orthonormal basis n1, n2 of the pencil of lines through p.
  const std::size_t k = static_cast<std::size_t>(
      std::min_element(p.begin(), p.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
      p.begin());
  Vec3 e{};
  e[k] = 1.0;
  const Vec3 n1 = unit(cross(p, e));
  const Vec3 n2 = unit(cross(p, n1));
  auto q = [](const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] - a[2] * b[2]; };
  const double qa = q(n1, n1), qb = q(n1, n2), qc = q(n2, n2);
  const double disc = qb * qb - qa * qc;
  const double scale = qb * qb + std::abs(qa * qc) + 1e-300;

  auto line = [&](double a, double b) {
    const Vec3 l{a * n1[0] + b * n2[0], a * n1[1] + b * n2[1], a * n1[2] + b * n2[2]};
    return projlin::HPoint{l[0], l[1], l[2]};
  };
  std::vector<projlin::HPoint> out;
  if (std::abs(disc) <= 1e-12 * scale) {
    if (std::abs(qa) >= std::abs(qc)) out.push_back(line(-qb, qa));
    else out.push_back(line(qc, -qb));
    return out;
  }
  if (disc < 0.0) return out;
  const double root = std::sqrt(disc);
  const double qq = -(qb + std::copysign(root, qb));
  // Roots of qa t^2 + 2 qb t + qc = 0 in t = a / b: qq / qa and qc / qq.
  out.push_back(line(qq, qa));
  out.push_back(line(qc, qq));
  return out;
}

DualCurve dual_circle(std::size_t samples) {
  DualCurve c;
  c.line = [](double s) { return Vec3{std::cos(s), std::sin(s), -1.0}; };
  c.derivative = [](double s) { return Vec3{-std::sin(s), std::cos(s), 0.0}; };
  c.s_min = 0.0;
  c.s_max = 2.0 * std::numbers::pi;
  c.samples = samples;
  return c;
}

CircleLocusResidual circle_locus_residual(const FlagPoint& f) {
  const Vec3 x = unit(f.point);
  const Vec3 l = unit(f.line);
  return {x[0] * x[0] + x[1] * x[1] - x[2] * x[2], dot(x, l), l[0] * l[0] + l[1] * l[1] - l[2] * l[2]};
}

}  // namespace shearfree::burgers
