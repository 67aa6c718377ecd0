#include "shearfree/congruence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "shearfree/error.hpp"
#include "shearfree/kernels.hpp"

namespace shearfree::congruence {
namespace {

using Vec4 = Eigen::Vector4d;

Vec4 as_vec(const Mat2& m) { return {m[0], m[1], m[2], m[3]}; }
Mat2 as_mat(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

std::string fmt(std::initializer_list<std::pair<const char*, double>> items) {
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (const auto& [name, value] : items) {
    os << (first ? "" : ", ") << name << " = " << value;
    first = false;
  }
  return os.str();
}

std::size_t max_abs_index(const Mat2& m) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (std::abs(m[i]) > std::abs(m[best])) best = i;
  }
  return best;
}

Mat2 scaled_by_entry(const Mat2& m, std::size_t i) {
  const double s = m[i];
  return {m[0] / s, m[1] / s, m[2] / s, m[3] / s};
}

// Parameter-space data of one geodesic: base point and direction (frozen
// pivot normalization) with their derivatives in u, x, y.
struct Stencil {
  Mat2 base{};
  Mat2 k{};
  std::size_t pivot = 0;
  std::array<Vec4, 3> d_base{};
  std::array<Vec4, 3> d_k{};

  Eigen::Matrix4d jacobian(double t) const {
    Eigen::Matrix4d j;
    for (int c = 0; c < 3; ++c) j.col(c) = d_base[c] + t * d_k[c];
    j.col(3) = as_vec(k);
    return j;
  }
};

Stencil make_stencil(const Congruence& c, double u, double x, double y, double h, bool richardson) {
  if (!(h > 0.0)) throw Error(ErrorKind::IllConditioned, "finite-difference step must be positive");
  Stencil st;
  const Geodesic g0 = c.geodesic(u, x, y);
  const Mat2 n0 = g0.direction();
  st.pivot = max_abs_index(n0);
  if (!(std::abs(n0[st.pivot]) > 0.0)) {
    throw Error(ErrorKind::IllConditioned, "zero geodesic direction at " + fmt({{"u", u}, {"x", x}, {"y", y}}));
  }
  st.base = g0.base;
  st.k = scaled_by_entry(n0, st.pivot);

  const std::array<double, 3> q{u, x, y};
  auto eval = [&](std::size_t axis, double offset) {
    std::array<double, 3> p = q;
    p[axis] += offset;
    const Geodesic g = c.geodesic(p[0], p[1], p[2]);
    return std::pair{as_vec(g.base), as_vec(scaled_by_entry(g.direction(), st.pivot))};
  };
  auto central = [&](std::size_t axis, double step) {
    const auto [b_hi, k_hi] = eval(axis, step);
    const auto [b_lo, k_lo] = eval(axis, -step);
    return std::pair<Vec4, Vec4>{(b_hi - b_lo) / (2.0 * step), (k_hi - k_lo) / (2.0 * step)};
  };
  for (std::size_t axis = 0; axis < 3; ++axis) {
    auto [db, dk] = central(axis, h);
    if (richardson) {
      const auto [db2, dk2] = central(axis, 0.5 * h);
      db = (4.0 * db2 - db) / 3.0;
      dk = (4.0 * dk2 - dk) / 3.0;
    }
    st.d_base[axis] = db;
    st.d_k[axis] = dk;
  }
  return st;
}

// Norm of a ^ b ^ c in R^4: root sum of squares of the 3x3 minors.
double wedge3(const Vec4& a, const Vec4& b, const Vec4& c) {
  Eigen::Matrix<double, 3, 4> m;
  m.row(0) = a.transpose();
  m.row(1) = b.transpose();
  m.row(2) = c.transpose();
  double sum = 0.0;
  for (int skip = 0; skip < 4; ++skip) {
    Eigen::Matrix3d minor;
    for (int col = 0, k = 0; col < 4; ++col) {
      if (col == skip) continue;
      minor.col(k++) = m.col(col);
    }
    const double d = minor.determinant();
    sum += d * d;
  }
  return std::sqrt(sum);
}

bool well_conditioned(const Eigen::Matrix4d& j, double det, double min_relative_det) {
  double scale = 1.0;
  for (int c = 0; c < 4; ++c) scale *= j.col(c).norm();
  return std::isfinite(det) && std::abs(det) > min_relative_det * scale;
}

void check_range(double lo, double hi, const char* what) {
  if (!(lo <= hi)) throw Error(ErrorKind::IllConditioned, std::string("empty ") + what + " range");
}

}  // namespace

std::array<double, 4> Grid4::point(std::size_t i) const {
  const std::size_t it = i % t.n, iy = (i / t.n) % y.n, ix = (i / (t.n * y.n)) % x.n,
                    iu = i / (t.n * y.n * x.n);
  return {u.at(iu), x.at(ix), y.at(iy), t.at(it)};
}

// ---------------------------------------------------------------- KappaField

struct KappaField::State {
  ScatteringData data;
  burgers::Forcing sigma;
  burgers::Forcing sigma_tilde;
  Box3 domain;
  burgers::SolverOptions opts;
  double margin = std::numeric_limits<double>::infinity();
};

KappaField::KappaField(ScatteringData data, burgers::Forcing sigma, burgers::Forcing sigma_tilde, Box3 domain,
                       burgers::SolverOptions opts)
    : state_(std::make_shared<State>(State{std::move(data), std::move(sigma), std::move(sigma_tilde), domain,
                                           opts})) {}

burgers::CauchyCurve KappaField::l_curve(double y) const {
  const ScatteringData& d = state_->data;
  auto pos = [x0 = d.x_min, x1 = d.x_max](double s) { return x0 + s * (x1 - x0); };
  burgers::CauchyCurve c;
  c.gamma = [section = d.section, pos, y](double s) {
    const double x = pos(s);
    return std::array<double, 2>{section(x, y), x};
  };
  c.slope = [l0 = d.slope_l, pos, y](double s) { return l0(pos(s), y); };
  c.samples = d.curve_samples;
  return c;
}

burgers::CauchyCurve KappaField::m_curve(double x) const {
  const ScatteringData& d = state_->data;
  auto pos = [y0 = d.y_min, y1 = d.y_max](double s) { return y0 + s * (y1 - y0); };
  burgers::CauchyCurve c;
  c.gamma = [section = d.section, pos, x](double s) {
    const double y = pos(s);
    return std::array<double, 2>{section(x, y), y};
  };
  c.slope = [m0 = d.slope_m, pos, x](double s) { return m0(x, pos(s)); };
  c.samples = d.curve_samples;
  return c;
}

burgers::Forcing KappaField::l_forcing(double y) const { return state_->sigma.with_label(y); }
burgers::Forcing KappaField::m_forcing(double x) const { return state_->sigma_tilde.with_label(x); }

double KappaField::L(double u, double x, double y) const {
  return burgers::eval_forced(l_forcing(y), l_curve(y), u, x, state_->opts);
}

double KappaField::M(double u, double x, double y) const {
  return burgers::eval_forced(m_forcing(x), m_curve(x), u, y, state_->opts);
}

double KappaField::l_residual(double u, double x, double y, double h) const {
  return burgers::pde_residual([&](double uu, double xx) { return L(uu, xx, y); }, l_forcing(y), u, x, h);
}

double KappaField::m_residual(double u, double x, double y, double h) const {
  return burgers::pde_residual([&](double uu, double yy) { return M(uu, x, yy); }, m_forcing(x), u, y, h);
}

const Box3& KappaField::domain() const noexcept { return state_->domain; }
const ScatteringData& KappaField::data() const noexcept { return state_->data; }
const burgers::SolverOptions& KappaField::options() const noexcept { return state_->opts; }
double KappaField::transversality_margin() const noexcept { return state_->margin; }

KappaField solve_scattering(const ScatteringData& data, const burgers::Forcing& sigma,
                            const burgers::Forcing& sigma_tilde, const Box3& domain,
                            const burgers::SolverOptions& opts, std::size_t slice_checks) {
  if (!data.section || !data.slope_l || !data.slope_m) {
    throw Error(ErrorKind::IllConditioned, "scattering data needs a section and both slope fields");
  }
  check_range(domain.u_min, domain.u_max, "u");
  check_range(domain.x_min, domain.x_max, "x");
  check_range(domain.y_min, domain.y_max, "y");
  check_range(data.x_min, data.x_max, "data x");
  check_range(data.y_min, data.y_max, "data y");

  KappaField field(data, sigma, sigma_tilde, domain, opts);
  const Axis xs{domain.x_min, domain.x_max, std::max<std::size_t>(slice_checks, 1)};
  const Axis ys{domain.y_min, domain.y_max, std::max<std::size_t>(slice_checks, 1)};

  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ys.n; ++i) {
    const double m = burgers::transversality_check(field.l_curve(ys.at(i)));
    if (!(m > 0.0)) {
      throw Error(ErrorKind::TransversalityViolation,
                  "L-equation Cauchy data is tangent to its datum line on the slice " + fmt({{"y", ys.at(i)}}));
    }
    margin = std::min(margin, m);
  }
  for (std::size_t i = 0; i < xs.n; ++i) {
    const double m = burgers::transversality_check(field.m_curve(xs.at(i)));
    if (!(m > 0.0)) {
      throw Error(ErrorKind::TransversalityViolation,
                  "M-equation Cauchy data is tangent to its datum line on the slice " + fmt({{"x", xs.at(i)}}));
    }
    margin = std::min(margin, m);
  }
  field.state_->margin = margin;

  // Characteristics from the crossection must not cross anywhere in the u-range.
  auto scan = [&](const burgers::CauchyCurve& curve, const burgers::Forcing& f, const char* equation,
                  const char* label, double value) {
    const burgers::BurgersSolution sol(f, curve, opts);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < curve.samples; ++i) {
      const double u0 = curve.gamma(curve.s_at(i))[0];
      lo = std::min(lo, u0);
      hi = std::max(hi, u0);
    }
    for (const auto& [from, to] : {std::pair{lo, domain.u_max}, std::pair{hi, domain.u_min}}) {
      if (from == to || (to == domain.u_max ? to < from : to > from)) continue;
      if (const auto cp = burgers::caustic_detect(sol, from, to)) {
        throw Error(ErrorKind::CausticReached, std::string(equation) + "-equation caustic on the slice " +
                                                   fmt({{label, value}, {"u*", cp->u}, {"position", cp->x}}));
      }
    }
  };
  for (std::size_t i = 0; i < ys.n; ++i) scan(field.l_curve(ys.at(i)), field.l_forcing(ys.at(i)), "L", "y", ys.at(i));
  for (std::size_t i = 0; i < xs.n; ++i) scan(field.m_curve(xs.at(i)), field.m_forcing(xs.at(i)), "M", "x", xs.at(i));
  return field;
}

// ---------------------------------------------------------------- Congruence

Congruence::Congruence(GeodesicFn geodesic, klein::AffineChart chart, FlagFn flags)
    : geodesic_(std::move(geodesic)), chart_(chart), flags_(std::move(flags)) {}

Mat2 Congruence::tangent(double u, double x, double y) const {
  const Mat2 n = geodesic_(u, x, y).direction();
  return scaled_by_entry(n, max_abs_index(n));
}

Mat2 Congruence::phi(double u, double x, double y, double t) const {
  const Geodesic g = geodesic_(u, x, y);
  const Mat2 n = g.direction();
  const Mat2 k = scaled_by_entry(n, max_abs_index(n));
  return {g.base[0] + t * k[0], g.base[1] + t * k[1], g.base[2] + t * k[2], g.base[3] + t * k[3]};
}

std::optional<projlin::PNFlag> Congruence::flag(double u, double x, double y) const {
  if (flags_) return flags_(u, x, y);
  const Geodesic g = geodesic_(u, x, y);
  return klein::chart_line_flag(chart_, g.base, g.alpha, g.beta);
}

Eigen::Matrix4d Congruence::jacobian(double u, double x, double y, double t, double h) const {
  return make_stencil(*this, u, x, y, h, true).jacobian(t);
}

Congruence build_congruence(const KappaField& kappa, const std::optional<Grid4>& foliation_grid, double h) {
  const klein::AffineChart chart = klein::AffineChart::scri_adapted();
  auto flag_at = [kappa](double u, double x, double y) {
    return klein::flag_from_slopes(klein::scri_point(u, x, y), kappa.L(u, x, y), kappa.M(u, x, y));
  };
  auto geodesic = [flag_at, chart](double u, double x, double y) {
    const klein::ChartLine line = klein::geodesic_chart_line(flag_at(u, x, y), chart);
    // The scri point lies on the line; using it as base makes Phi(., 0) scri.
    return Geodesic{Mat2{x, 0.0, u, y}, line.alpha, line.beta};
  };
  Congruence c(geodesic, chart, flag_at);
  if (!foliation_grid) return c;

  const Grid4& grid = *foliation_grid;
  const std::vector<double> dets = kernels::det_sweep(c, grid, h, kernels::Execution::Parallel);
  auto report = [&](const std::array<double, 4>& a, const std::array<double, 4>& b) {
    // Bisect the segment a-b for the zero of det(jac).
    double lo = 0.0, hi = 1.0;
    auto det_at = [&](double s) {
      std::array<double, 4> p{};
      for (int i = 0; i < 4; ++i) p[i] = a[i] + s * (b[i] - a[i]);
      return c.jacobian(p[0], p[1], p[2], p[3], h).determinant();
    };
    const double d_lo = det_at(lo);
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((det_at(mid) > 0.0) == (d_lo > 0.0)) lo = mid;
      else hi = mid;
    }
    const double s = 0.5 * (lo + hi);
    std::array<double, 4> p{};
    for (int i = 0; i < 4; ++i) p[i] = a[i] + s * (b[i] - a[i]);
    throw Error(ErrorKind::FoliationFailure,
                "det(jacobian) vanishes near " + fmt({{"u", p[0]}, {"x", p[1]}, {"y", p[2]}, {"t", p[3]}}));
  };
  const std::array<std::size_t, 4> strides{grid.t.n * grid.y.n * grid.x.n, grid.t.n * grid.y.n, grid.t.n, 1};
  const std::array<std::size_t, 4> sizes{grid.u.n, grid.x.n, grid.y.n, grid.t.n};
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!(std::isfinite(dets[i])) || dets[i] == 0.0) report(grid.point(i), grid.point(i));
    for (std::size_t axis = 0; axis < 4; ++axis) {
      const std::size_t index = (i / strides[axis]) % sizes[axis];
      if (index + 1 >= sizes[axis]) continue;
      const std::size_t j = i + strides[axis];
      if ((dets[i] > 0.0) != (dets[j] > 0.0)) report(grid.point(i), grid.point(j));
    }
  }
  return c;
}

Congruence twisted(const Congruence& base, double rate) {
  auto geodesic = [base, rate](double u, double x, double y) {
    Geodesic g = base.geodesic(u, x, y);
    const double c = std::cos(rate * x), s = std::sin(rate * x);
    g.alpha = {c * g.alpha[0] - s * g.alpha[1], s * g.alpha[0] + c * g.alpha[1]};
    return g;
  };
  return Congruence(geodesic, base.chart());
}

Congruence parallel_congruence() {
  return Congruence([](double u, double x, double y) { return Geodesic{Mat2{u, 0.0, x, y}, {1.0, 0.0}, {0.0, 1.0}}; },
                    klein::AffineChart::scri_adapted());
}

// ---------------------------------------------------------------- shear

std::vector<ShearSample> shear_fibre(const Congruence& c, double u, double x, double y, std::span<const double> ts,
                                     const ShearOptions& opts) {
  const Stencil st = make_stencil(c, u, x, y, opts.h, opts.richardson);
  const std::size_t ir = st.pivot / 2, jc = st.pivot % 2;
  // k = a b^T with a = column jc, b = row ir (k[ir][jc] = 1). The null
  // vectors m = a e^T and m' = f b^T complete a frame of k-perp / k.
  const std::array<double, 2> a{st.k[jc], st.k[2 + jc]};
  const std::array<double, 2> b{st.k[2 * ir], st.k[2 * ir + 1]};
  Mat2 m{}, mp{};
  const std::size_t e = 1 - jc, f = 1 - ir;
  m[e] = a[0];
  m[2 + e] = a[1];
  mp[2 * f] = b[0];
  mp[2 * f + 1] = b[1];

  // Parameter derivatives of m and m' follow from those of k.
  std::array<Vec4, 3> d_m{}, d_mp{};
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const Vec4& dk = st.d_k[axis];
    d_m[axis] = Vec4::Zero();
    d_m[axis][e] = dk[jc];
    d_m[axis][2 + e] = dk[2 + jc];
    d_mp[axis] = Vec4::Zero();
    d_mp[axis][2 * f] = dk[2 * ir];
    d_mp[axis][2 * f + 1] = dk[2 * ir + 1];
  }
  auto spacetime = [](const std::array<Vec4, 3>& d) {
    Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
    for (int col = 0; col < 3; ++col) p.col(col) = d[col];
    return p;
  };
  const Eigen::Matrix4d pk = spacetime(st.d_k), pm = spacetime(d_m), pmp = spacetime(d_mp);
  const Vec4 kv = as_vec(st.k), mv = as_vec(m), mpv = as_vec(mp);

  std::vector<ShearSample> out;
  out.reserve(ts.size());
  for (const double t : ts) {
    ShearSample s;
    s.u = u, s.x = x, s.y = y, s.t = t;
    const Eigen::Matrix4d j = st.jacobian(t);
    s.det_jacobian = j.determinant();
    if (!well_conditioned(j, s.det_jacobian, opts.min_relative_det)) {
      s.ok = false;
      s.error = "jacobian is singular at " + fmt({{"u", u}, {"x", x}, {"y", y}, {"t", t}});
      out.push_back(s);
      continue;
    }
    const Eigen::Matrix4d inv = j.inverse();
    const Eigen::Matrix4d dk = pk * inv, dm = pm * inv, dmp = pmp * inv;
    const Vec4 km = dk * mv, kmp = dk * mpv;
    s.shear_m = opts.metric_scale * klein::metric(as_mat(km), m);
    s.shear_mp = opts.metric_scale * klein::metric(as_mat(kmp), mp);
    s.shear_norm = std::hypot(s.shear_m, s.shear_mp);
    s.frobenius_m = wedge3(dm * kv - km, kv, mv);
    s.frobenius_mp = wedge3(dmp * kv - kmp, kv, mpv);
    out.push_back(s);
  }
  return out;
}

ShearSample shear_at(const Congruence& c, double u, double x, double y, double t, const ShearOptions& opts) {
  const double ts[1] = {t};
  ShearSample s = shear_fibre(c, u, x, y, ts, opts).front();
  if (!s.ok) throw Error(ErrorKind::IllConditioned, s.error);
  return s;
}

std::vector<double> jacobian_dets(const Congruence& c, double u, double x, double y, std::span<const double> ts,
                                  double h) {
  const Stencil st = make_stencil(c, u, x, y, h, true);
  std::vector<double> out;
  out.reserve(ts.size());
  for (const double t : ts) out.push_back(st.jacobian(t).determinant());
  return out;
}

ShearReport shear_report(const Congruence& c, const Grid4& grid, const ShearOptions& opts) {
  ShearReport r;
  r.samples = kernels::shear_sweep(c, grid, opts, kernels::Execution::Parallel);
  for (const ShearSample& s : r.samples) {
    if (!s.ok) throw Error(ErrorKind::IllConditioned, s.error);
    r.max_shear = std::max(r.max_shear, s.shear_norm);
    r.max_frobenius = std::max({r.max_frobenius, s.frobenius_m, s.frobenius_mp});
  }
  return r;
}

FrobeniusResult frobenius_check(const Congruence& c, const Grid4& grid, const ShearOptions& opts) {
  FrobeniusResult out;
  for (const ShearSample& s : kernels::shear_sweep(c, grid, opts, kernels::Execution::Parallel)) {
    if (!s.ok) throw Error(ErrorKind::IllConditioned, s.error);
    out.max_sigma = std::max(out.max_sigma, s.frobenius_m);
    out.max_sigma_prime = std::max(out.max_sigma_prime, s.frobenius_mp);
  }
  return out;
}

// ---------------------------------------------------------------- rank and round trip

KappaRank kappa_rank(const KappaField& kappa, double u, double x, double y, double h, double threshold) {
  auto rows = [&](double uu, double xx, double yy) {
    const projlin::PNFlag f =
        klein::flag_from_slopes(klein::scri_point(uu, xx, yy), kappa.L(uu, xx, yy), kappa.M(uu, xx, yy));
    return std::pair{f.v1().row(0), projlin::annihilator(f.v3()).row(0)};
  };
  const auto [v0, w0] = rows(u, x, y);
  auto pivot_of = [](const projlin::Row& r) {
    return static_cast<std::size_t>(std::max_element(r.begin(), r.end(), [](double a, double b) {
                                      return std::abs(a) < std::abs(b);
                                    }) -
                                    r.begin());
  };
  const std::size_t pv = pivot_of(v0), pw = pivot_of(w0);
  // Affine coordinates of a point of P^3 in the chart of the frozen pivot.
  auto affine = [](const projlin::Row& r, std::size_t p) {
    Eigen::Vector3d a;
    for (std::size_t i = 0, k = 0; i < 4; ++i) {
      if (i != p) a[static_cast<int>(k++)] = r[i] / r[p];
    }
    return a;
  };
  Eigen::Matrix3d d1, d3;
  const std::array<double, 3> q{u, x, y};
  for (int axis = 0; axis < 3; ++axis) {
    std::array<double, 3> hi = q, lo = q;
    hi[axis] += h;
    lo[axis] -= h;
    const auto [vh, wh] = rows(hi[0], hi[1], hi[2]);
    const auto [vl, wl] = rows(lo[0], lo[1], lo[2]);
    d1.col(axis) = (affine(vh, pv) - affine(vl, pv)) / (2.0 * h);
    d3.col(axis) = (affine(wh, pw) - affine(wl, pw)) / (2.0 * h);
  }
  KappaRank r;
  const Eigen::Vector3d s1 = Eigen::JacobiSVD<Eigen::Matrix3d>(d1).singularValues();
  const Eigen::Vector3d s3 = Eigen::JacobiSVD<Eigen::Matrix3d>(d3).singularValues();
  for (int i = 0; i < 3; ++i) {
    r.sv1[i] = s1[i];
    r.sv3[i] = s3[i];
    if (s1[i] > threshold * s1[0]) ++r.rank1;
    if (s3[i] > threshold * s3[0]) ++r.rank3;
  }
  return r;
}

RoundTrip scattering_roundtrip(const Congruence& c, const ScatteringData& data, const Axis& xs, const Axis& ys) {
  RoundTrip r;
  for (std::size_t i = 0; i < xs.n; ++i) {
    for (std::size_t j = 0; j < ys.n; ++j) {
      const double x = xs.at(i), y = ys.at(j), u = data.section(x, y);
      const Geodesic g = c.geodesic(u, x, y);
      const Mat2 z0 = c.phi(u, x, y, 0.0);
      const projlin::PNFlag flag = klein::chart_line_flag(c.chart(), z0, g.alpha, g.beta);
      const klein::ScriPoint p = klein::scri_intersection(flag);
      r.max_coordinate_error =
          std::max({r.max_coordinate_error, std::abs(p.u - u), std::abs(p.x - x), std::abs(p.y - y)});
      const double l = klein::alpha_trace_on_beta_plane(flag.v1(), y).slope;
      const double m = klein::beta_trace_on_alpha_plane(flag.v3(), x).slope;
      r.max_slope_error =
          std::max({r.max_slope_error, std::abs(l - data.slope_l(x, y)), std::abs(m - data.slope_m(x, y))});
      const auto expected = c.chart().point(klein::scri_point(u, x, y).plane);
      if (!expected) throw Error(ErrorKind::NoChartIntersection, "scri point outside the congruence chart");
      for (int k = 0; k < 4; ++k) r.max_chart_error = std::max(r.max_chart_error, std::abs(z0[k] - (*expected)[k]));
    }
  }
  return r;
}

}  // namespace shearfree::congruence
