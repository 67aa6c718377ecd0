#include "shearfree/klein.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "shearfree/error.hpp"

namespace shearfree::klein {
namespace {

using projlin::kDefaultTol;

double norm(const Row& r) { return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + r[3] * r[3]); }

double max_abs(const Row& r) {
  return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2]), std::abs(r[3])});
}

double det4(std::array<Row, 4> a) {
  double det = 1.0;
  for (std::size_t col = 0; col < 4; ++col) {
    std::size_t best = col;
    for (std::size_t i = col + 1; i < 4; ++i) {
      if (std::abs(a[i][col]) > std::abs(a[best][col])) best = i;
    }
    if (a[best][col] == 0.0) return 0.0;
    if (best != col) {
      std::swap(a[best], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t i = col + 1; i < 4; ++i) {
      const double f = a[i][col] / a[col][col];
      for (std::size_t j = col; j < 4; ++j) a[i][j] -= f * a[col][j];
    }
  }
  return det;
}

Mat2 normalize_direction(Mat2 n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (std::abs(n[i]) > std::abs(n[best])) best = i;
  }
  const double s = n[best];
  for (double& v : n) v /= s;
  n[best] = 1.0;
  return n;
}

void require_plane(const Subspace& plane, const char* what) {
  if (plane.ambient() != 4) throw Error(ErrorKind::DimensionMismatch, what);
  if (plane.dim() == 0) throw Error(ErrorKind::ZeroSubspace, what);
  if (plane.dim() != 2) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + ": expected a 2-plane, got dim " + std::to_string(plane.dim()));
  }
}

}  // namespace

double det2(const Mat2& m) { return m[0] * m[3] - m[1] * m[2]; }

double metric(const Mat2& a, const Mat2& b) {
  return 0.5 * (a[0] * b[3] + a[3] * b[0] - a[1] * b[2] - a[2] * b[1]);
}

double PluckerVector::relation() const { return p[0] * p[5] - p[1] * p[4] + p[2] * p[3]; }

PluckerVector plucker_embed(const Subspace& plane) {
  require_plane(plane, "plucker_embed");
  const Row& r = plane.row(0);
  const Row& s = plane.row(1);
  constexpr std::array<std::array<std::size_t, 2>, 6> kPairs{
      {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  PluckerVector out;
  double m = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    const auto [i, j] = kPairs[k];
    out.p[k] = r[i] * s[j] - r[j] * s[i];
    m = std::max(m, std::abs(out.p[k]));
  }
  for (double& v : out.p) v /= m;
  return out;
}

double null_separation(const Subspace& a, const Subspace& b) {
  require_plane(a, "null_separation");
  require_plane(b, "null_separation");
  std::array<Row, 4> m{a.row(0), a.row(1), b.row(0), b.row(1)};
  double scale = 1.0;
  for (const Row& r : m) scale *= norm(r);
  return det4(m) / scale;
}

const Subspace& infinity_point() {
  static const Subspace kI = projlin::span_canonical({projlin::unit(0), projlin::unit(1)});
  return kI;
}

ScriPoint scri_point(double u, double x, double y) {
  ScriPoint p;
  p.u = u;
  p.x = x;
  p.y = y;
  p.plane = projlin::span_canonical({Row{1.0, x, 0.0, 0.0}, Row{0.0, u, 1.0, y}});
  return p;
}

ScriPoint scri_intersection(const PNFlag& flag) {
  const Subspace& inf = infinity_point();
  if (projlin::contains(inf, flag.v1())) {
    throw Error(ErrorKind::TangentAtInfinity, "V1 lies in I: the geodesic is contained in scri");
  }
  if (projlin::contains(flag.v3(), inf)) {
    throw Error(ErrorKind::TangentAtInfinity, "I lies in V3: the geodesic is contained in scri");
  }
  const Subspace along_i = projlin::meet(inf, flag.v3());
  const Subspace j = projlin::join(flag.v1(), along_i);
  if (along_i.dim() != 1 || j.dim() != 2) {
    throw Error(ErrorKind::TangentAtInfinity, "degenerate intersection with I");
  }
  const Row& g = along_i.row(0);
  if (!(std::abs(g[0]) > kDefaultTol * max_abs(g))) {
    throw Error(ErrorKind::ChartBoundary, "scri point has x = infinity");
  }
  const double x = g[1] / g[0];

  std::size_t pick = std::abs(j.row(0)[2]) >= std::abs(j.row(1)[2]) ? 0 : 1;
  const Row& r = j.row(pick);
  if (!(std::abs(r[2]) > kDefaultTol * max_abs(r))) {
    throw Error(ErrorKind::ChartBoundary, "scri point has y = infinity");
  }
  const double y = r[3] / r[2];
  const double u = r[1] / r[2] - (r[0] / r[2]) * x;
  return scri_point(u, x, y);
}

TraceLine alpha_trace_on_beta_plane(const Subspace& v1, double y0) {
  if (v1.ambient() != 4 || v1.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "alpha trace needs a line of T");
  const Row& v = v1.row(0);
  const double a = v[0], b = v[1], c = v[2], d = v[3];
  const double scale = std::max(1.0, max_abs(v));
  if (std::abs(d - c * y0) > kDefaultTol * scale * std::max(1.0, std::abs(y0))) {
    throw Error(ErrorKind::NotIncident, "alpha-plane does not meet the beta-plane y = " + std::to_string(y0));
  }
  if (!(std::abs(a) > kDefaultTol * scale)) {
    throw Error(ErrorKind::TangentDirection, "alpha trace is the excluded line u = const");
  }
  return {b / a, -c / a};
}

TraceLine beta_trace_on_alpha_plane(const Subspace& v3, double x0) {
  if (v3.ambient() != 4 || v3.dim() != 3) throw Error(ErrorKind::DimensionMismatch, "beta trace needs a 3-space of T");
  const Subspace ann = projlin::annihilator(v3);
  const Row& w = ann.row(0);
  const double scale = std::max(1.0, max_abs(w));
  if (std::abs(w[0] + x0 * w[1]) > kDefaultTol * scale * std::max(1.0, std::abs(x0))) {
    throw Error(ErrorKind::NotIncident, "beta-plane does not meet the alpha-plane x = " + std::to_string(x0));
  }
  if (!(std::abs(w[3]) > kDefaultTol * scale)) {
    throw Error(ErrorKind::TangentDirection, "beta trace is the excluded line u = const");
  }
  return {-w[2] / w[3], -w[1] / w[3]};
}

PNFlag flag_from_slopes(const ScriPoint& p, double slope_l, double slope_m) {
  const Row v{1.0, p.x - slope_l * p.u, -slope_l, -slope_l * p.y};
  const Row w{p.x * slope_m, -slope_m, slope_m * p.u - p.y, 1.0};
  Subspace v1 = projlin::span_canonical({v});
  Subspace v3 = projlin::annihilator(projlin::span_canonical({w}));
  return PNFlag(std::move(v1), std::move(v3));
}

Row polarity(const Row& v) { return Row{-v[3], v[2], -v[1], v[0]}; }

AffineChart AffineChart::spacetime() { return AffineChart({2, 3}, {0, 1}); }

AffineChart AffineChart::scri_adapted() { return AffineChart({0, 2}, {1, 3}); }

Subspace AffineChart::plane(const Mat2& z) const {
  Row r0{}, r1{};
  r0[base_[0]] = 1.0;
  r0[fibre_[0]] = z[0];
  r0[fibre_[1]] = z[1];
  r1[base_[1]] = 1.0;
  r1[fibre_[0]] = z[2];
  r1[fibre_[1]] = z[3];
  return projlin::span_canonical({r0, r1});
}

std::optional<Mat2> AffineChart::point(const Subspace& plane) const {
  require_plane(plane, "AffineChart::point");
  const Row& r0 = plane.row(0);
  const Row& r1 = plane.row(1);
  const Mat2 b{r0[base_[0]], r0[base_[1]], r1[base_[0]], r1[base_[1]]};
  const Mat2 f{r0[fibre_[0]], r0[fibre_[1]], r1[fibre_[0]], r1[fibre_[1]]};
  const double det = det2(b);
  const double scale = std::max(norm(r0), 1.0) * std::max(norm(r1), 1.0);
  if (!(std::abs(det) > kDefaultTol * scale)) return std::nullopt;
  // Z = B^{-1} F
  const Mat2 inv{b[3] / det, -b[1] / det, -b[2] / det, b[0] / det};
  return Mat2{inv[0] * f[0] + inv[1] * f[2], inv[0] * f[1] + inv[1] * f[3],
              inv[2] * f[0] + inv[3] * f[2], inv[2] * f[1] + inv[3] * f[3]};
}

ChartLine geodesic_chart_line(const PNFlag& flag, const AffineChart& chart) {
  const Row& v = flag.v1().row(0);
  const Row w = projlin::annihilator(flag.v3()).row(0);
  const auto& bi = chart.base();
  const auto& fi = chart.fibre();
  const std::array<double, 2> pi{v[bi[0]], v[bi[1]]};
  const std::array<double, 2> omega{v[fi[0]], v[fi[1]]};
  const std::array<double, 2> wb{w[bi[0]], w[bi[1]]};
  const std::array<double, 2> wf{w[fi[0]], w[fi[1]]};
  const double vs = max_abs(v), ws = max_abs(w);
  if (!(std::hypot(pi[0], pi[1]) > kDefaultTol * vs)) {
    throw Error(ErrorKind::NoChartIntersection, "V1 lies in the chart's point at infinity");
  }
  if (!(std::hypot(wf[0], wf[1]) > kDefaultTol * ws)) {
    throw Error(ErrorKind::NoChartIntersection, "V3 contains the chart's point at infinity");
  }

  // pi Z = omega and Z wf = -wb, unknowns (Z11, Z12, Z21, Z22); rank 3.
  Eigen::Matrix4d a;
  a << pi[0], 0.0, pi[1], 0.0,
       0.0, pi[0], 0.0, pi[1],
       wf[0], wf[1], 0.0, 0.0,
       0.0, 0.0, wf[0], wf[1];
  const Eigen::Vector4d rhs(omega[0], omega[1], -wb[0], -wb[1]);
  const Eigen::Vector4d z = a.completeOrthogonalDecomposition().solve(rhs);

  const std::array<double, 2> alpha{pi[1], -pi[0]};
  const std::array<double, 2> beta{wf[1], -wf[0]};
  ChartLine line;
  line.base.X = {z[0], z[1], z[2], z[3]};
  line.direction = normalize_direction(
      {alpha[0] * beta[0], alpha[0] * beta[1], alpha[1] * beta[0], alpha[1] * beta[1]});
  line.alpha = alpha;
  line.beta = beta;
  return line;
}

PNFlag chart_line_flag(const AffineChart& chart, const Mat2& point, const std::array<double, 2>& alpha,
                       const std::array<double, 2>& beta) {
  const auto& bi = chart.base();
  const auto& fi = chart.fibre();
  std::array<Row, 2> rows{};
  for (std::size_t i = 0; i < 2; ++i) {
    rows[i][bi[i]] = 1.0;
    rows[i][fi[0]] = point[2 * i];
    rows[i][fi[1]] = point[2 * i + 1];
  }
  // c^T (Z + t alpha beta^T) is independent of t iff c is orthogonal to alpha.
  const std::array<double, 2> c{alpha[1], -alpha[0]};
  Row v{};
  Row f{};
  for (std::size_t k = 0; k < 4; ++k) v[k] = c[0] * rows[0][k] + c[1] * rows[1][k];
  f[fi[0]] = beta[0];
  f[fi[1]] = beta[1];
  return PNFlag(projlin::span_canonical({v}), projlin::span_canonical({rows[0], rows[1], f}));
}

}  // namespace shearfree::klein
