#pragma once

// The Klein quadric of 2-planes in the twistor space T = R^4, its conformal
// structure, scri (the null cone of the fixed point I = span{e1, e2}) and the
// incidence constructions between flags and scri.

#include <array>
#include <cstddef>
#include <optional>

#include "shearfree/projlin.hpp"

namespace shearfree::klein {

using projlin::PNFlag;
using projlin::Row;
using projlin::Subspace;

/// 2x2 real matrix stored row-major: {m11, m12, m21, m22}.
using Mat2 = std::array<double, 4>;

double det2(const Mat2& m);
/// Quadratic form q(N) = det N on chart differences, signature (2,2).
inline double quadratic_form(const Mat2& n) { return det2(n); }
/// Polarization of q: g(A, B) = (q(A + B) - q(A) - q(B)) / 2.
double metric(const Mat2& a, const Mat2& b);

/// Plücker coordinates (p12, p13, p14, p23, p24, p34), max-abs normalized.
struct PluckerVector {
  std::array<double, 6> p{};

  /// p12 p34 - p13 p24 + p14 p23; zero on the Klein quadric.
  double relation() const;
};

/// Throws ZeroSubspace (dim 0) or DimensionMismatch (any other dim != 2).
PluckerVector plucker_embed(const Subspace& plane);

/// Normalized 4x4 determinant of the stacked bases of two 2-planes. Vanishes
/// iff the planes meet, i.e. iff the points of K are null-separated.
double null_separation(const Subspace& a, const Subspace& b);

/// The point I = span{e1, e2} whose null cone is scri.
const Subspace& infinity_point();

/// A point of scri in chart coordinates (u, x, y) with its 2-plane
/// span{e1 + x e2, e3 + y e4 + u e2}. x labels alpha-planes (the P^1 of pi'),
/// y labels beta-planes (the P^1 of pi), u is the fibre coordinate.
struct ScriPoint {
  double u = 0.0;
  double x = 0.0;
  double y = 0.0;
  Subspace plane = Subspace::zero(4);
};

ScriPoint scri_point(double u, double x, double y);

/// The unique scri point J with V1 ⊂ J ⊂ V3. Throws TangentAtInfinity if
/// V1 ⊂ I or I ⊂ V3, ChartBoundary if J is outside the (u, x, y) chart.
ScriPoint scri_intersection(const PNFlag& flag);

/// A straight line `position = intercept + slope * u` on a leaf of scri.
struct TraceLine {
  double intercept = 0.0;
  double slope = 0.0;
};

/// Trace of the alpha-plane of V1 on the beta-plane {y = y0}: the line
/// x = X0 + L u. Throws NotIncident or TangentDirection.
TraceLine alpha_trace_on_beta_plane(const Subspace& v1, double y0);

/// Trace of the beta-plane of V3 on the alpha-plane {x = x0}: the line
/// y = Y0 + M u. Throws NotIncident or TangentDirection.
TraceLine beta_trace_on_alpha_plane(const Subspace& v3, double x0);

/// Flag whose alpha trace through p has slope L and beta trace has slope M.
PNFlag flag_from_slopes(const ScriPoint& p, double slope_l, double slope_m);

/// Null polarity (a, b, c, d) -> (-d, c, -b, a), the covector of the
/// symplectic form e1^e4 - e2^e3. Sends alpha data to beta data and the scri
/// point (u, x, y) to (u, y, x).
Row polarity(const Row& v);

/// An affine chart of K: planes rowspan{ e_base[i] + sum_j Z_ij e_fibre[j] }.
/// Every plane meeting span(e_fibre) (the chart's point at infinity) is
/// outside the chart. Null separation of chart points is det(Z - Z') = 0.
class AffineChart {
 public:
  /// rowspan[X | I2]; its point at infinity is I, so scri is at infinity.
  static AffineChart spacetime();
  /// Point at infinity span{e2, e4}; scri is the null hyperplane Z12 = 0 and
  /// scri_point(u, x, y) has chart coordinates [[x, 0], [u, y]].
  static AffineChart scri_adapted();

  Subspace plane(const Mat2& z) const;
  /// Chart coordinates of a plane, or nullopt if it meets infinity.
  std::optional<Mat2> point(const Subspace& plane) const;

  const std::array<std::size_t, 2>& base() const noexcept { return base_; }
  const std::array<std::size_t, 2>& fibre() const noexcept { return fibre_; }

 private:
  AffineChart(std::array<std::size_t, 2> base, std::array<std::size_t, 2> fibre)
      : base_(base), fibre_(fibre) {}

  std::array<std::size_t, 2> base_;
  std::array<std::size_t, 2> fibre_;
};

struct ChartPoint {
  Mat2 X{};
};

/// The chart points of a null geodesic: X(t) = base + t * direction with
/// det(direction) = 0, direction max-abs normalized with positive sign, base
/// the minimum-norm point of the line.
struct ChartLine {
  ChartPoint base;
  Mat2 direction{};
  /// Unnormalized factors, direction proportional to alpha beta^T.
  std::array<double, 2> alpha{};
  std::array<double, 2> beta{};
};

/// Throws NoChartIntersection when the geodesic lies at the chart's infinity.
ChartLine geodesic_chart_line(const PNFlag& flag,
                              const AffineChart& chart = AffineChart::spacetime());

/// The flag of the chart line through `point` with direction alpha beta^T:
/// V1 is common to every plane of the line, V3 is their sum.
PNFlag chart_line_flag(const AffineChart& chart, const Mat2& point, const std::array<double, 2>& alpha,
                       const std::array<double, 2>& beta);

}  // namespace shearfree::klein
