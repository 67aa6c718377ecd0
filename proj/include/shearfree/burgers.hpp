#pragma once

// Burgers' functions: the flat solver (line characteristics), the forced
// solver (characteristics of x'' = sigma(u, x, x')), Cauchy transversality,
// caustics and the numeric dual of a second-order ODE.

#include <array>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace shearfree::burgers {

using ScalarFn = std::function<double(double)>;

/// Coefficient of the forcing as a function of (u, position, label). For the
/// L-equation position is x and label the frozen y; for the M-equation the
/// roles are swapped.
using CoefficientFn = std::function<double(double u, double pos, double label)>;

/// Forcing sigma(u, x, p) = A0 + A1 p + A2 p^2 + A3 p^3. At most four
/// coefficients can be stored, so sigma is cubic in the slope by construction.
class Forcing {
 public:
  Forcing() = default;
  /// Throws ForcingDegree when more than four coefficients are supplied.
  explicit Forcing(std::span<const CoefficientFn> coefficients);
  Forcing(std::initializer_list<CoefficientFn> coefficients);

  /// Constant coefficients; throws ForcingDegree for more than four.
  static Forcing constant(std::initializer_list<double> coefficients);
  static Forcing constant(std::span<const double> coefficients);

  /// Builds the cubic interpolant in p of `sigma` (nodes p = -1, 0, 1, 2).
  /// Probes the fourth finite difference in p at each (u, pos, label) of
  /// `probes` and throws ForcingDegree if sigma is not cubic in p there.
  using SlopeFn = std::function<double(double u, double pos, double label, double p)>;
  static Forcing from_slope_function(SlopeFn sigma,
                                     std::span<const std::array<double, 3>> probes);

  double operator()(double u, double pos, double p) const;
  double coefficient(std::size_t i, double u, double pos) const;
  bool is_zero() const noexcept;

  /// Copy with the frozen label (y for the L-equation, x for the M-equation).
  Forcing with_label(double label) const;
  double label() const noexcept { return label_; }

 private:
  std::array<CoefficientFn, 4> coefficients_{};
  double label_ = 0.0;
};

struct SolverOptions {
  double step = 1e-3;          ///< RK4 step for characteristics
  double state_bound = 1e6;    ///< |x| or |p| beyond this is a blow-up
  std::size_t scan_samples = 64;
  double search_radius = 8.0;  ///< half-width of the flat root scan
  std::size_t max_iterations = 200;
};

/// Cauchy data: a curve s in [0, 1] -> (u(s), x(s)) with the slope datum
/// L_gamma(s) of the line assigned to gamma(s).
struct CauchyCurve {
  std::function<std::array<double, 2>(double)> gamma;
  ScalarFn slope;
  std::size_t samples = 65;

  /// The level curve u = u0, x = x_min + s (x_max - x_min) with datum L0(x).
  static CauchyCurve on_level(double u0, double x_min, double x_max, ScalarFn initial,
                              std::size_t samples = 65);

  double s_at(std::size_t i) const;
};

struct CharState {
  double u = 0.0;
  double x = 0.0;
  double p = 0.0;
};

/// Integrates x' = p, p' = sigma(u, x, p) with classical RK4 from u0 to u_end
/// (either direction) with at most `step` per step. Throws BlowUp.
std::vector<CharState> characteristic_trace(const Forcing& f, double u0, double x0, double p0,
                                            double u_end, double step = 1e-3,
                                            double state_bound = 1e6);

/// End state only.
CharState integrate_characteristic(const Forcing& f, CharState start, double u_end,
                                   const SolverOptions& opts = {});

/// Solution of L_u + L L_x = 0 with L(0, x) = L0(x). Throws CausticReached.
double eval_flat(const ScalarFn& initial, double u, double x, const SolverOptions& opts = {});

/// Foot point X(u, x) = x0 of the characteristic through (u, x).
double transport_eval(const ScalarFn& initial, double u, double x, const SolverOptions& opts = {});

/// Minimum over the curve samples of |sin| of the angle between the curve
/// tangent and the datum line. Throws DegenerateCurve.
double transversality_check(const CauchyCurve& curve);

/// Cauchy data in the projective plane: points gamma(s) and datum lines
/// through them, both as homogeneous 3-vectors.
struct ProjectiveCauchyCurve {
  std::function<std::array<double, 3>(double)> point;
  std::function<std::array<double, 3>(double)> line;
  double s_min = 0.0;
  double s_max = 1.0;
  std::size_t samples = 200;
};

/// Minimum of |T x L| / (|T| |L|) where T is the tangent line of the curve.
/// Throws DegenerateCurve, or NotIncident if a datum line misses its point.
double transversality_check(const ProjectiveCauchyCurve& curve);

/// Solution of L_u + L L_x = sigma(u, x, L) by shooting over the curve
/// parameter. Throws CausticReached, BlowUp.
double eval_forced(const Forcing& f, const CauchyCurve& curve, double u, double x,
                   const SolverOptions& opts = {});

/// Forcing, Cauchy data and solver settings; the characteristic map
/// (s, u) -> (x, p) is evaluated on demand.
class BurgersSolution {
 public:
  BurgersSolution(Forcing forcing, CauchyCurve curve, SolverOptions opts = {});

  double eval(double u, double x) const;
  CharState characteristic(double s, double u) const;

  const Forcing& forcing() const noexcept { return forcing_; }
  const CauchyCurve& curve() const noexcept { return curve_; }
  const SolverOptions& options() const noexcept { return opts_; }

 private:
  Forcing forcing_;
  CauchyCurve curve_;
  SolverOptions opts_;
};

struct CausticPoint {
  double u = 0.0;
  double x = 0.0;
};

/// Earliest u in [u_min, u_max] where adjacent characteristics cross
/// (dx/ds changes sign), refined by bisection to `u_tol`.
std::optional<CausticPoint> caustic_detect(const BurgersSolution& sol, double u_min, double u_max,
                                           double u_tol = 1e-8);

/// Central-difference residual L_u + L L_x - sigma(u, x, L) at (u, x).
double pde_residual(const std::function<double(double, double)>& field, const Forcing& f,
                    double u, double x, double h);

struct DualOdeRequest {
  double basepoint = 0.0;                  ///< u at which (a, b) = (x, x')
  std::vector<std::array<double, 2>> targets;  ///< (u, x) points, u != basepoint
  std::vector<double> a_values;
  double h = 1e-4;
};

/// One point of the incidence curve {(a, b) : x(u; a, b) = x} of a target,
/// with its first and second derivative b'(a), b''(a) = sigma*(a, b, b').
struct DualSample {
  double u = 0.0;
  double x = 0.0;
  double a = 0.0;
  double b = 0.0;
  double slope = 0.0;
  double sigma_star = 0.0;
};

struct DualSamples {
  std::vector<DualSample> samples;

  double max_abs() const;
  /// Least-squares constant-coefficient cubic fit of sigma* in the slope.
  Forcing constant_forcing() const;
};

/// Numeric dual equation. Throws BlowUp or IllConditioned.
DualSamples dual_ode_extract(const Forcing& f, const DualOdeRequest& request,
                             const SolverOptions& opts = {});

/// Root of g in [lo, hi] with g(lo), g(hi) of opposite sign: bisection with
/// secant and inverse-quadratic steps (Brent), to full double precision.
double bracketed_root(const std::function<double(double)>& g, double lo, double hi, double g_lo,
                      double g_hi, std::size_t max_iterations = 200);

}  // namespace shearfree::burgers
