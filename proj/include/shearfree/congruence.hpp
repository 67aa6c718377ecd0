#pragma once

// Cauchy problem at scri: scattering data on a crossection -> solution (L, M)
// of the Burgers pair -> null geodesic congruence -> numeric shear.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shearfree/burgers.hpp"
#include "shearfree/klein.hpp"

namespace shearfree::congruence {

using klein::Mat2;

struct Box3 {
  double u_min = 0.0, u_max = 0.0;
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
};

/// n equally spaced samples of [min, max] (n == 1 gives min).
struct Axis {
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 1;

  double at(std::size_t i) const {
    return n < 2 ? min : min + (max - min) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
};

struct Grid3 {
  Axis u, x, y;
  std::size_t size() const { return u.n * x.n * y.n; }
};

struct Grid4 {
  Axis u, x, y, t;
  std::size_t size() const { return u.n * x.n * y.n * t.n; }
  /// Point of flat index i; t varies fastest, then y, x, u.
  std::array<double, 4> point(std::size_t i) const;
};

using Field2 = std::function<double(double, double)>;

/// Crossection u = section(x, y) of scri with slope data L0(x, y), M0(x, y)
/// over the rectangle [x_min, x_max] x [y_min, y_max].
struct ScatteringData {
  Field2 section;
  Field2 slope_l;
  Field2 slope_m;
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  std::size_t curve_samples = 65;
};

/// Solution (L, M) of L_u + L L_x = sigma(u, x, y, L), M_u + M M_y =
/// sigma~(u, x, y, M), evaluable anywhere in its domain.
///
/// `sigma` coefficients are called as (u, x, y); `sigma_tilde` coefficients
/// are called as (u, y, x), i.e. position first and the frozen label last.
class KappaField {
 public:
  KappaField(ScatteringData data, burgers::Forcing sigma, burgers::Forcing sigma_tilde, Box3 domain,
             burgers::SolverOptions opts);

  double L(double u, double x, double y) const;
  double M(double u, double x, double y) const;

  /// Cauchy data and forcing of the y-slice (beta-plane) for L and of the
  /// x-slice (alpha-plane) for M.
  burgers::CauchyCurve l_curve(double y) const;
  burgers::CauchyCurve m_curve(double x) const;
  burgers::Forcing l_forcing(double y) const;
  burgers::Forcing m_forcing(double x) const;

  double l_residual(double u, double x, double y, double h) const;
  double m_residual(double u, double x, double y, double h) const;

  const Box3& domain() const noexcept;
  const ScatteringData& data() const noexcept;
  const burgers::SolverOptions& options() const noexcept;
  double transversality_margin() const noexcept;

 private:
  friend KappaField solve_scattering(const ScatteringData&, const burgers::Forcing&,
                                     const burgers::Forcing&, const Box3&,
                                     const burgers::SolverOptions&, std::size_t);
  struct State;
  std::shared_ptr<State> state_;
};

/// Validates transversality of every checked slice and the absence of a
/// caustic within the domain's u-range, then returns the evaluable field.
/// Throws TransversalityViolation, CausticReached (naming slice and u*).
KappaField solve_scattering(const ScatteringData& data, const burgers::Forcing& sigma,
                            const burgers::Forcing& sigma_tilde, const Box3& domain,
                            const burgers::SolverOptions& opts = {}, std::size_t slice_checks = 11);

/// A null geodesic as base point plus direction alpha beta^T in a chart.
struct Geodesic {
  Mat2 base{};
  std::array<double, 2> alpha{};
  std::array<double, 2> beta{};

  Mat2 direction() const {
    return {alpha[0] * beta[0], alpha[0] * beta[1], alpha[1] * beta[0], alpha[1] * beta[1]};
  }
};

using GeodesicFn = std::function<Geodesic(double u, double x, double y)>;
using FlagFn = std::function<projlin::PNFlag(double u, double x, double y)>;

/// Family Phi(u, x, y, t) = base(u, x, y) + t N(u, x, y) of chart lines with
/// N max-abs normalized (largest entry +1).
class Congruence {
 public:
  Congruence(GeodesicFn geodesic, klein::AffineChart chart, FlagFn flags = {});

  Geodesic geodesic(double u, double x, double y) const { return geodesic_(u, x, y); }
  Mat2 phi(double u, double x, double y, double t) const;
  Mat2 tangent(double u, double x, double y) const;
  std::optional<projlin::PNFlag> flag(double u, double x, double y) const;
  const klein::AffineChart& chart() const noexcept { return chart_; }

  /// d Phi / d(u, x, y, t) by central differences with one Richardson step.
  /// The direction is normalized by the entry that is largest at the centre,
  /// which is a smooth reparameterization of t near the point.
  Eigen::Matrix4d jacobian(double u, double x, double y, double t, double h = 1e-3) const;

 private:
  GeodesicFn geodesic_;
  klein::AffineChart chart_;
  FlagFn flags_;
};

/// Congruence of the flags (scri_point(u, x, y), L, M) in the scri-adapted
/// chart, so that Phi(u, x, y, 0) is the scri point itself. When
/// `foliation_grid` is given, det(jacobian) is checked for a sign change on it
/// (FoliationFailure, reporting the bisected locus).
Congruence build_congruence(const KappaField& kappa, const std::optional<Grid4>& foliation_grid = {},
                            double h = 1e-3);

/// Same geodesics with alpha rotated by the angle rate * x; not shearfree.
Congruence twisted(const Congruence& base, double rate);

/// Phi = (Z11, Z12, Z21, Z22) = (u, t, x, y): every geodesic has direction E12.
Congruence parallel_congruence();

struct ShearOptions {
  double h = 1e-3;
  bool richardson = true;
  double metric_scale = 1.0;
  double min_relative_det = 1e-12;
};

struct ShearSample {
  double u = 0.0, x = 0.0, y = 0.0, t = 0.0;
  double shear_m = 0.0;       ///< g(nabla_m k, m)
  double shear_mp = 0.0;      ///< g(nabla_m' k, m')
  double shear_norm = 0.0;    ///< hypot of the two
  double frobenius_m = 0.0;   ///< |[k, m] ^ k ^ m|
  double frobenius_mp = 0.0;  ///< |[k, m'] ^ k ^ m'|
  double det_jacobian = 0.0;
  bool ok = true;
  std::string error;
};

/// Shear of the congruence at one point. Throws IllConditioned.
ShearSample shear_at(const Congruence& c, double u, double x, double y, double t,
                     const ShearOptions& opts = {});

struct ShearReport {
  std::vector<ShearSample> samples;
  double max_shear = 0.0;
  double max_frobenius = 0.0;
};

/// Throws IllConditioned if any grid point fails.
ShearReport shear_report(const Congruence& c, const Grid4& grid, const ShearOptions& opts = {});

struct FrobeniusResult {
  double max_sigma = 0.0;
  double max_sigma_prime = 0.0;
};
FrobeniusResult frobenius_check(const Congruence& c, const Grid4& grid, const ShearOptions& opts = {});

/// Singular values of the numeric differentials of kappa_1 = V1 and
/// kappa_3 = V3 (affine coordinates) and the ranks at relative threshold.
struct KappaRank {
  std::array<double, 3> sv1{};
  std::array<double, 3> sv3{};
  int rank1 = 0;
  int rank3 = 0;
};
KappaRank kappa_rank(const KappaField& kappa, double u, double x, double y, double h = 1e-3,
                     double threshold = 1e-6);

/// Recovery of the scattering data on the crossection from the chart lines
/// of the congruence alone (flags rebuilt from base point and direction).
struct RoundTrip {
  double max_coordinate_error = 0.0;  ///< scri_intersection vs generating (u, x, y)
  double max_slope_error = 0.0;       ///< alpha/beta trace slopes vs L0, M0
  double max_chart_error = 0.0;       ///< Phi(., 0) vs the chart point of scri
};
RoundTrip scattering_roundtrip(const Congruence& c, const ScatteringData& data, const Axis& x,
                               const Axis& y);

/// Samples of one geodesic at several t, sharing the parameter stencil.
std::vector<ShearSample> shear_fibre(const Congruence& c, double u, double x, double y,
                                     std::span<const double> ts, const ShearOptions& opts = {});
std::vector<double> jacobian_dets(const Congruence& c, double u, double x, double y,
                                  std::span<const double> ts, double h = 1e-3);

}  // namespace shearfree::congruence
