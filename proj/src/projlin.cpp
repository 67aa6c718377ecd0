#include "shearfree/projlin.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "shearfree/error.hpp"

namespace shearfree::projlin {
namespace {

void check_ambient(std::size_t n) {
  if (n < 1 || n > kMaxAmbient) {
    throw Error(ErrorKind::DimensionMismatch, "ambient dimension " + std::to_string(n));
  }
}

double max_abs(const Row& r, std::size_t n) {
  double m = 0.0;
  for (std::size_t j = 0; j < n; ++j) m = std::max(m, std::abs(r[j]));
  return m;
}

struct Echelon {
  std::vector<Row> rows;
  std::vector<std::size_t> pivots;
};

// Reduced row echelon form; rows below `tol` are dropped before elimination.
Echelon reduce(std::span<const Row> input, std::size_t n, double tol) {
  Echelon e;
  for (const Row& r : input) {
    double m = max_abs(r, n);
    if (!(m > tol)) continue;
    Row s{};
    int exponent = std::ilogb(m);
    for (std::size_t j = 0; j < n; ++j) s[j] = std::ldexp(r[j], -exponent);
    e.rows.push_back(s);
  }
  std::vector<Row>& a = e.rows;
  std::size_t r = 0;
  for (std::size_t col = 0; col < n && r < a.size(); ++col) {
    std::size_t best = r;
    for (std::size_t i = r + 1; i < a.size(); ++i) {
      if (std::abs(a[i][col]) > std::abs(a[best][col])) best = i;
    }
    if (!(std::abs(a[best][col]) > tol)) {
      for (std::size_t i = r; i < a.size(); ++i) a[i][col] = 0.0;
      continue;
    }
    std::swap(a[r], a[best]);
    const double p = a[r][col];
    for (std::size_t j = 0; j < n; ++j) a[r][j] /= p;
    a[r][col] = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == r) continue;
      const double f = a[i][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) a[i][j] -= f * a[r][j];
      a[i][col] = 0.0;
    }
    e.pivots.push_back(col);
    ++r;
  }
  a.resize(r);
  return e;
}

}  // namespace

HPoint::HPoint(std::initializer_list<double> coords)
    : HPoint(std::span<const double>(coords.begin(), coords.size())) {}

HPoint::HPoint(std::span<const double> coords) : size_(coords.size()) {
  if (size_ < 2 || size_ > kMaxAmbient) {
    throw Error(ErrorKind::DimensionMismatch, "homogeneous point of length " + std::to_string(size_));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < size_; ++i) {
    if (std::abs(coords[i]) > std::abs(coords[best])) best = i;
  }
  const double scale = coords[best];
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw Error(ErrorKind::ZeroSubspace, "homogeneous point with all coordinates zero");
  }
  for (std::size_t i = 0; i < size_; ++i) coords_[i] = coords[i] / scale;
  coords_[best] = 1.0;
}

double pairing(const HPoint& x, const HPoint& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::DimensionMismatch, "pairing of points of different length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

Subspace Subspace::from_rows(std::span<const Row> rows, std::size_t ambient, double tol) {
  check_ambient(ambient);
  Echelon e = reduce(rows, ambient, tol);
  Subspace s(ambient, tol);
  s.dim_ = e.rows.size();
  for (std::size_t i = 0; i < s.dim_; ++i) {
    s.rows_[i] = e.rows[i];
    s.pivots_[i] = e.pivots[i];
  }
  return s;
}

Subspace Subspace::zero(std::size_t ambient, double tol) {
  check_ambient(ambient);
  return Subspace(ambient, tol);
}

Subspace Subspace::whole(std::size_t ambient, double tol) {
  check_ambient(ambient);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < ambient; ++i) rows.push_back(unit(i));
  return from_rows(rows, ambient, tol);
}

Row Subspace::residual(const Row& v) const {
  Row r = v;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double f = r[pivots_[i]];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < ambient_; ++j) r[j] -= f * rows_[i][j];
    r[pivots_[i]] = 0.0;
  }
  return r;
}

bool operator==(const Subspace& a, const Subspace& b) {
  if (a.ambient_ != b.ambient_ || a.dim_ != b.dim_) return false;
  for (std::size_t i = 0; i < a.dim_; ++i) {
    for (std::size_t j = 0; j < a.ambient_; ++j) {
      if (a.rows_[i][j] != b.rows_[i][j]) return false;
    }
  }
  return true;
}

Subspace span_canonical(std::span<const Row> rows, double tol, std::size_t ambient) {
  if (rows.empty()) throw Error(ErrorKind::ZeroSubspace, "span of no rows");
  Subspace s = Subspace::from_rows(rows, ambient, tol);
  if (s.dim() == 0) throw Error(ErrorKind::ZeroSubspace, "all rows below tolerance");
  return s;
}

Subspace span_canonical(std::initializer_list<Row> rows, double tol, std::size_t ambient) {
  return span_canonical(std::span<const Row>(rows.begin(), rows.size()), tol, ambient);
}

Subspace join(const Subspace& u, const Subspace& v) {
  if (u.ambient() != v.ambient()) throw Error(ErrorKind::DimensionMismatch, "join");
  std::vector<Row> rows(u.basis().begin(), u.basis().end());
  rows.insert(rows.end(), v.basis().begin(), v.basis().end());
  return Subspace::from_rows(rows, u.ambient(), std::max(u.tol(), v.tol()));
}

Subspace annihilator(const Subspace& u) {
  const std::size_t n = u.ambient();
  std::vector<bool> is_pivot(n, false);
  for (std::size_t i = 0; i < u.dim(); ++i) is_pivot[u.pivot(i)] = true;
  std::vector<Row> rows;
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    Row w{};
    w[f] = 1.0;
    for (std::size_t i = 0; i < u.dim(); ++i) w[u.pivot(i)] = -u.row(i)[f];
    rows.push_back(w);
  }
  return Subspace::from_rows(rows, n, u.tol());
}

Subspace meet(const Subspace& u, const Subspace& v) {
  if (u.ambient() != v.ambient()) throw Error(ErrorKind::DimensionMismatch, "meet");
  return annihilator(join(annihilator(u), annihilator(v)));
}

bool contains(const Subspace& u, const Subspace& v) {
  if (u.ambient() != v.ambient()) throw Error(ErrorKind::DimensionMismatch, "contains");
  if (v.dim() > u.dim()) return false;
  const double tol = std::max(u.tol(), v.tol());
  for (const Row& row : v.basis()) {
    const double scale = std::max(1.0, max_abs(row, v.ambient()));
    if (max_abs(u.residual(row), u.ambient()) > tol * scale) return false;
  }
  return true;
}

std::size_t rank_of(std::span<const Row> rows, std::size_t ambient, double tol) {
  check_ambient(ambient);
  return reduce(rows, ambient, tol).rows.size();
}

PNFlag::PNFlag(Subspace v1, Subspace v3) : v1_(std::move(v1)), v3_(std::move(v3)) {
  if (v1_.ambient() != 4 || v3_.ambient() != 4 || v1_.dim() != 1 || v3_.dim() != 3) {
    throw Error(ErrorKind::DimensionMismatch, "flag needs dim V1 = 1 and dim V3 = 3 in R^4");
  }
  if (!contains(v3_, v1_)) throw Error(ErrorKind::NotIncident, "V1 is not contained in V3");
}

Row unit(std::size_t i) {
  Row r{};
  r[i] = 1.0;
  return r;
}

}  // namespace shearfree::projlin
