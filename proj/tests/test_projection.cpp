#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "urerf/projection.hpp"

using namespace urerf;

namespace {

DataMatrix random_matrix(std::size_t n, std::size_t p, Rng& rng) {
  DataMatrix x(n, p);
  for (auto& v : x.values()) v = rng.normal() * 10.0;
  return x;
}

}  // namespace

TEST_SUITE_BEGIN("projection");

TEST_CASE("nonzero counts") {
  CHECK(projection_nonzeros(20, 4, 1.0 / 20) == 4);
  CHECK(projection_nonzeros(1, 1, 1.0) == 1);
  CHECK(projection_nonzeros(100, 10, 1.0 / 20) == 50);
  CHECK(projection_nonzeros(10, 4, 1.0 / 20) == 4);  // column floor
  CHECK(projection_nonzeros(5, 5, 1.0) == 25);

  Rng rng(1);
  const auto a = sample_projection(20, 4, 1.0 / 20, rng);
  CHECK(a.nonzeros() == 4);
  const auto one = sample_projection(1, 1, 1.0, rng);
  REQUIRE(one.nonzeros() == 1);
  CHECK((one.entries()[0].sign == 1 || one.entries()[0].sign == -1));
}

TEST_CASE("sampled structure") {
  Rng rng(2);
  const std::pair<std::size_t, std::size_t> shapes[] = {{3, 2}, {20, 5}, {10003, 101}, {6, 6}, {4, 3}};
  for (const auto& [p, d] : shapes) {
    for (double lambda : {0.01, 0.05, 0.5, 0.9, 1.0}) {
      const auto a = sample_projection(p, d, lambda, rng);
      REQUIRE(a.nonzeros() == projection_nonzeros(p, d, lambda));
      std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
      std::vector<int> per_col(d, 0);
      for (const auto& e : a.entries()) {
        REQUIRE(e.row < p);
        REQUIRE(e.col < d);
        REQUIRE(seen.insert({e.row, e.col}).second);
        ++per_col[e.col];
      }
      for (int c : per_col) REQUIRE(c >= 1);
    }
  }
}

TEST_CASE("sign balance") {
  Rng rng(3);
  long plus = 0, total = 0;
  for (int s = 0; s < 10000; ++s) {
    const auto a = sample_projection(20, 4, 1.0 / 20, rng);
    for (const auto& e : a.entries()) {
      plus += e.sign > 0;
      ++total;
    }
  }
  CHECK(std::abs(static_cast<double>(plus) / total - 0.5) < 0.02);
}

TEST_CASE("positions are spread uniformly") {
  Rng rng(4);
  std::vector<int> hits(12, 0);
  const int draws = 30000;
  for (int s = 0; s < draws; ++s) {
    const auto a = sample_projection(4, 3, 0.5, rng);
    for (const auto& e : a.entries()) ++hits[e.row * 3 + e.col];
  }
  // 6 of 12 cells each draw.
  for (int h : hits) CHECK(std::abs(h / static_cast<double>(draws) - 0.5) < 0.02);
}

TEST_CASE("identity and sign flip") {
  Rng rng(5);
  const auto x = random_matrix(6, 4, rng);
  std::vector<ProjectionEntry> diag;
  for (std::uint32_t i = 0; i < 4; ++i) diag.push_back({i, i, 1});
  CHECK(project(SparseProjection(4, 4, diag), x) == x);

  const auto flip = project(SparseProjection(4, 1, {{0, 0, -1}}), x);
  REQUIRE(flip.cols() == 1);
  for (std::size_t i = 0; i < 6; ++i) CHECK(flip(i, 0) == -x(i, 0));
}

TEST_CASE("matches dense multiply exactly") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t p = 1 + rng.below(12), d = 1 + rng.below(6), n = 1 + rng.below(8);
    const auto a = sample_projection(p, d, 0.05 + 0.95 * rng.uniform(), rng);
    const auto x = random_matrix(n, p, rng);
    REQUIRE(project(a, x) == oracle::dense_project(a, x));
  }
  const auto a = sample_projection(5, 3, 0.4, rng);
  const auto x = random_matrix(4, 5, rng);
  CHECK(project(a, x) == oracle::dense_project(a, x));
}

TEST_CASE("projection is linear") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = sample_projection(9, 3, 0.3, rng);
    const auto x = random_matrix(5, 9, rng), y = random_matrix(5, 9, rng);
    const double alpha = rng.normal(), beta = rng.normal();
    DataMatrix comb(5, 9);
    for (std::size_t k = 0; k < comb.values().size(); ++k) {
      comb.values()[k] = alpha * x.values()[k] + beta * y.values()[k];
    }
    const auto lhs = project(a, comb);
    const auto px = project(a, x), py = project(a, y);
    for (std::size_t k = 0; k < lhs.values().size(); ++k) {
      const double rhs = alpha * px.values()[k] + beta * py.values()[k];
      REQUIRE(lhs.values()[k] == doctest::Approx(rhs).epsilon(1e-12).scale(100.0));
    }
  }
}

TEST_CASE("column weights") {
  const SparseProjection a(5, 2, {{4, 0, 1}, {1, 0, -1}, {2, 1, 1}});
  const auto w = a.column(0);
  CHECK(w.features == std::vector<std::uint32_t>{1, 4});
  CHECK(w.signs == std::vector<std::int8_t>{-1, 1});
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(w.apply(x) == 3.0);
  CHECK(a.column(1).apply(x) == 3.0);
}

TEST_CASE("invalid input") {
  Rng rng(8);
  const auto a = sample_projection(3, 2, 0.5, rng);
  CHECK_THROWS_AS(project(a, DataMatrix(2, 4)), std::invalid_argument);
  CHECK_THROWS_AS(sample_projection(0, 2, 0.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_projection(3, 2, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_projection(3, 2, 1.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(SparseProjection(2, 2, {{0, 0, 1}, {0, 0, -1}, {1, 1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(SparseProjection(2, 2, {{0, 0, 1}}), std::invalid_argument);  // empty column
  CHECK_THROWS_AS(SparseProjection(2, 2, {{0, 0, 2}, {1, 1, 1}}), std::invalid_argument);
}

TEST_SUITE_END();
