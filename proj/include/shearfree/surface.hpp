#pragma once

// Burgers' surfaces in the flag space {(point, line) : <point, line> = 0} of
// the projective plane, their caustic curves, and the circle example.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shearfree/projlin.hpp"

namespace shearfree::burgers {

using Vec3 = std::array<double, 3>;

Vec3 cross(const Vec3& a, const Vec3& b);
double dot(const Vec3& a, const Vec3& b);

/// An immersed curve s -> gamma(s) in the dual plane (a family of lines).
/// `derivative` is optional; when absent it is taken by Richardson-refined
/// central differences.
struct DualCurve {
  std::function<Vec3(double)> line;
  std::function<Vec3(double)> derivative;
  double s_min = 0.0;
  double s_max = 1.0;
  std::size_t samples = 200;
};

/// A point of the flag space: a point of P^2 on a line of (P^2)^*.
struct FlagPoint {
  Vec3 point{};
  Vec3 line{};
};

/// One chart of a Burgers' surface, (s, theta) -> flag with theta in
/// (theta_min, theta_max). Along theta the point runs over the line gamma(s):
/// point = cos(theta) T(s) + sin(theta) D(s), T the caustic point and D the
/// point at infinity of the line.
struct SurfaceSheet {
  std::string label;
  double theta_min = 0.0;
  double theta_max = 0.0;
  std::function<FlagPoint(double s, double theta)> chart;
};

/// Legendrian lift s -> (tangency point, line) of the envelope.
struct CausticCurve {
  std::vector<double> parameters;
  std::vector<FlagPoint> samples;
};

struct BurgersSurface {
  std::vector<SurfaceSheet> sheets;
  std::optional<CausticCurve> caustic;
  /// theta values where sheets meet away from the caustic (chart-boundary
  /// markers, e.g. the line at infinity for the circle).
  std::vector<double> ramification_thetas;
};

/// Maximal Burgers' surface over the dual curve: every point of every line,
/// split into the two sheets on either side of the caustic point. Throws
/// DegenerateCurve where the dual curve is not immersed.
BurgersSurface surface_from_caustic(const DualCurve& curve);

/// Tangent lines to the circle x^2 + y^2 = z^2 through `pt`: two outside the
/// circle, one on it, none inside. Each line is max-abs normalized.
std::vector<projlin::HPoint> circle_tangent_lines(const projlin::HPoint& pt);

/// Dual circle p^2 + q^2 = r^2 parameterized as (cos s, sin s, -1), s in [0, 2 pi].
DualCurve dual_circle(std::size_t samples = 200);

/// Residuals of the caustic locus equations of the circle example.
struct CircleLocusResidual {
  double circle = 0.0;     ///< x^2 + y^2 - z^2
  double incidence = 0.0;  ///< x p + y q + z r
  double dual = 0.0;       ///< p^2 + q^2 - r^2
};
CircleLocusResidual circle_locus_residual(const FlagPoint& f);

}  // namespace shearfree::burgers
