#pragma once

// Projective linear algebra over the twistor space R^4 (and R^3 for the
// projective-plane constructions of the Burgers module).

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace shearfree::projlin {

inline constexpr double kDefaultTol = 1e-10;
inline constexpr std::size_t kMaxAmbient = 4;

using Row = std::array<double, kMaxAmbient>;

/// Homogeneous coordinates of a point of P^2 or P^3 (or of a dual line).
/// Stored normalized: the largest-magnitude entry is exactly +1, ties go to
/// the lowest index.
class HPoint {
 public:
  HPoint(std::initializer_list<double> coords);
  explicit HPoint(std::span<const double> coords);

  std::size_t size() const noexcept { return size_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return {coords_.data(), size_}; }

  friend bool operator==(const HPoint&, const HPoint&) = default;

 private:
  std::array<double, kMaxAmbient> coords_{};
  std::size_t size_ = 0;
};

/// Sum of x_i y_i of the canonical representatives. Zero means incidence.
double pairing(const HPoint& x, const HPoint& y);

/// A linear subspace of R^n (n = 3 or 4) in reduced row echelon form.
///
/// Rows are reduced with partial pivoting; a column whose remaining entries
/// are all at most `tol` in magnitude is skipped and those entries are set to
/// zero. Input rows are first rescaled by a power of two so their largest
/// entry lies in [1, 2); the rescaling is exact, which keeps canonicalization
/// bit-idempotent. The zero subspace (dim 0) is a legal value.
class Subspace {
 public:
  /// Canonical span of `rows`. The zero subspace is returned (not thrown) when
  /// every row is below tolerance; see span_canonical for the throwing form.
  static Subspace from_rows(std::span<const Row> rows, std::size_t ambient,
                            double tol = kDefaultTol);
  static Subspace zero(std::size_t ambient, double tol = kDefaultTol);
  static Subspace whole(std::size_t ambient, double tol = kDefaultTol);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t ambient() const noexcept { return ambient_; }
  double tol() const noexcept { return tol_; }

  std::span<const Row> basis() const noexcept { return {rows_.data(), dim_}; }
  const Row& row(std::size_t i) const { return rows_[i]; }
  /// Column index of the leading 1 in row i.
  std::size_t pivot(std::size_t i) const { return pivots_[i]; }

  /// Residual of v after reduction against the basis (zero iff v is in span).
  Row residual(const Row& v) const;

  friend bool operator==(const Subspace& a, const Subspace& b);

 private:
  Subspace(std::size_t ambient, double tol) : ambient_(ambient), tol_(tol) {}

  std::array<Row, kMaxAmbient> rows_{};
  std::array<std::size_t, kMaxAmbient> pivots_{};
  std::size_t dim_ = 0;
  std::size_t ambient_ = 4;
  double tol_ = kDefaultTol;
};

/// Throws ZeroSubspace when all rows are below `tol`.
Subspace span_canonical(std::span<const Row> rows, double tol = kDefaultTol,
                        std::size_t ambient = 4);
Subspace span_canonical(std::initializer_list<Row> rows, double tol = kDefaultTol,
                        std::size_t ambient = 4);

Subspace join(const Subspace& u, const Subspace& v);
Subspace meet(const Subspace& u, const Subspace& v);
/// Annihilator of U, expressed in the dual coordinates (same index order).
Subspace annihilator(const Subspace& u);
/// True iff every basis row of V lies in the row space of U within tolerance.
bool contains(const Subspace& u, const Subspace& v);

/// Numerical rank of a stack of rows (Gaussian elimination with the same
/// threshold as canonicalization).
std::size_t rank_of(std::span<const Row> rows, std::size_t ambient, double tol = kDefaultTol);

/// Incident pair V1 ⊂ V3 of R^4: an unparametrized null geodesic.
class PNFlag {
 public:
  /// Throws DimensionMismatch for wrong dimensions and NotIncident when
  /// V1 is not contained in V3.
  PNFlag(Subspace v1, Subspace v3);

  const Subspace& v1() const noexcept { return v1_; }
  const Subspace& v3() const noexcept { return v3_; }

 private:
  Subspace v1_;
  Subspace v3_;
};

/// Basis vector e_i (0-based) of R^4.
Row unit(std::size_t i);

}  // namespace shearfree::projlin
