#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "shearfree/error.hpp"
#include "shearfree/projlin.hpp"

using namespace shearfree;
using namespace shearfree::projlin;

namespace {

const Row e1 = unit(0), e2 = unit(1), e3 = unit(2), e4 = unit(3);

Row add(const Row& a, const Row& b, double s = 1.0) {
  return {a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]};
}

// Independent rank oracle: full-pivot elimination on a copy.
std::size_t oracle_rank(std::vector<Row> rows) {
  std::size_t rank = 0;
  for (std::size_t col = 0; col < 4 && rank < rows.size(); ++col) {
    std::size_t best = rank;
    for (std::size_t r = rank; r < rows.size(); ++r)
      if (std::abs(rows[r][col]) > std::abs(rows[best][col])) best = r;
    if (std::abs(rows[best][col]) < 1e-9) continue;
    std::swap(rows[rank], rows[best]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) rows[r] = add(rows[r], rows[rank], -rows[r][col] / rows[rank][col]);
    ++rank;
  }
  return rank;
}

Row random_row(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(-3, 3);
  return {double(d(rng)), double(d(rng)), double(d(rng)), double(d(rng))};
}

}  // namespace

TEST_CASE("span_canonical examples") {
  const auto a = span_canonical({e1, e2});
  CHECK(a.dim() == 2);
  CHECK(a.row(0) == e1);
  CHECK(a.row(1) == e2);

  const auto b = span_canonical({e1, Row{2, 0, 0, 0}});
  CHECK(b.dim() == 1);
  CHECK(b.row(0) == e1);

  CHECK(span_canonical({add(e1, e2), add(e1, e2, -1), e1}).dim() == 2);
}

TEST_CASE("span_canonical of zero rows throws") {
  try {
    (void)span_canonical({Row{}, Row{1e-14, 0, 0, 0}});
    FAIL("expected ZeroSubspace");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroSubspace);
  }
  CHECK(Subspace::from_rows(std::vector<Row>{Row{}}, 4).dim() == 0);
}

TEST_CASE("meet, join and contains") {
  const auto m = meet(span_canonical({e1, e2}), span_canonical({e2, e3}));
  CHECK(m == span_canonical({e2}));
  CHECK(meet(span_canonical({e1, e2}), span_canonical({e3, e4})).dim() == 0);
  CHECK(join(span_canonical({e1}), span_canonical({e2})) == span_canonical({e1, e2}));
  const auto u = span_canonical({add(e1, e3), e2});
  CHECK(join(u, u) == u);
  CHECK(contains(span_canonical({e1, e2, e3}), span_canonical({add(e1, e2)})));
  CHECK_FALSE(contains(span_canonical({e1, e2}), span_canonical({e3})));
}

TEST_CASE("pairing") {
  CHECK(pairing(HPoint{1, 0, 0}, HPoint{0, 0, 1}) == 0.0);
  CHECK(pairing(HPoint{1, 2, 3}, HPoint{3, 0, -1}) == doctest::Approx(0.0));
  CHECK(pairing(HPoint{1, 1, 1}, HPoint{1, 1, 1}) == 3.0);
}

TEST_CASE("HPoint normalizes to max-abs +1") {
  const HPoint p{1.0, std::sqrt(3.0), -2.0};
  CHECK(p[2] == 1.0);
  CHECK(p[0] == -0.5);
  CHECK(HPoint{2, 4, 6} == HPoint{-1, -2, -3});
}

TEST_CASE("PNFlag rejects non-incident pairs") {
  CHECK_NOTHROW(PNFlag(span_canonical({e1}), span_canonical({e1, e2, e3})));
  try {
    PNFlag(span_canonical({e4}), span_canonical({e1, e2, e3}));
    FAIL("expected NotIncident");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotIncident);
  }
}

TEST_CASE("property: rank agrees with an independent elimination") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Row> rows;
    const int n = 1 + trial % 4;
    for (int i = 0; i < n; ++i) rows.push_back(random_row(rng));
    if (trial % 3 == 0 && n > 1) rows.back() = add(rows[0], rows[1], 2.0);
    const auto expected = oracle_rank(rows);
    CHECK(rank_of(rows, 4) == expected);
    CHECK(Subspace::from_rows(rows, 4).dim() == expected);
  }
}

TEST_CASE("property: canonicalization is idempotent and meet/join satisfy Grassmann") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto u = Subspace::from_rows(std::vector<Row>{random_row(rng), random_row(rng)}, 4);
    const auto v = Subspace::from_rows(std::vector<Row>{random_row(rng), random_row(rng)}, 4);
    CHECK(Subspace::from_rows(u.basis(), 4) == u);
    CHECK(meet(u, v).dim() + join(u, v).dim() == u.dim() + v.dim());
    CHECK(contains(join(u, v), u));
    CHECK(contains(u, meet(u, v)));
  }
}

TEST_CASE("annihilator pairs to zero") {
  const auto u = span_canonical({add(e1, e3), add(e2, e4, -2)});
  const auto w = annihilator(u);
  REQUIRE(w.dim() == 2);
  for (const Row& a : u.basis())
    for (const Row& b : w.basis()) CHECK(a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3] == doctest::Approx(0.0));
}
