#include <cmath>

#include "doctest.h"
#include "dre/metrics.hpp"

using namespace dre;

namespace {

Matrix rows2(double a0, double a1, double b0, double b1) {
  Matrix m(2, 2);
  m << a0, a1, b0, b1;
  return m;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("error_multi sums relative snapshot errors over time") {
  // Snapshot 0: ref (3,4), rec (3,3) -> 1/25. Snapshot 1: ref (0,2),
  // rec (1,2) -> 1/4. Aggregate sqrt(0.04 + 0.25).
  std::vector<Matrix> ref = {rows2(3, 4, 0, 2)};
  std::vector<Matrix> rec = {rows2(3, 3, 1, 2)};
  CHECK(error_multi(ref, rec) == doctest::Approx(std::sqrt(0.29)).epsilon(1e-14));

  // A second identical trajectory leaves the per-sample average unchanged.
  ref.push_back(ref[0]);
  rec.push_back(rec[0]);
  CHECK(error_multi(ref, rec) == doctest::Approx(std::sqrt(0.29)).epsilon(1e-14));

  // Time is summed, not averaged: the same error spread over twice as many
  // snapshots grows the aggregate.
  Matrix ref4(4, 2), rec4(4, 2);
  ref4 << 3, 4, 0, 2, 3, 4, 0, 2;
  rec4 << 3, 3, 1, 2, 3, 3, 1, 2;
  CHECK(error_multi({ref4}, {rec4}) ==
        doctest::Approx(std::sqrt(0.58)).epsilon(1e-14));
}

TEST_CASE("error_ave_rel averages relative norms per snapshot") {
  std::vector<Matrix> ref = {rows2(3, 4, 0, 2)};
  std::vector<Matrix> rec = {rows2(3, 3, 1, 2)};
  Vector e = error_ave_rel(ref, rec);
  REQUIRE(e.size() == 2);
  CHECK(e[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(e[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("error_ave_con is signed and cancels symmetric defects") {
  std::vector<Matrix> ref = {rows2(3, 4, 0, 2)};
  std::vector<Matrix> rec = {rows2(3, 3, 1, 2)};
  Vector e = error_ave_con(ref, rec);
  REQUIRE(e.size() == 2);
  CHECK(e[0] == 1.0);   // (3-3) + (4-3)
  CHECK(e[1] == -1.0);  // (0-1) + (2-2)

  // Two samples with opposite defects cancel to zero.
  std::vector<Matrix> ref2 = {ref[0], ref[0]};
  std::vector<Matrix> rec2 = {rec[0], rows2(3, 5, -1, 2)};
  Vector e2 = error_ave_con(ref2, rec2);
  CHECK(e2[0] == 0.0);
  CHECK(e2[1] == 0.0);
}

TEST_CASE("zero-norm reference snapshots are excluded from relative errors") {
  Matrix ref3(3, 2), rec3(3, 2);
  ref3 << 3, 4, 0, 0, 0, 2;
  rec3 << 3, 3, 9, 9, 1, 2;  // the middle row would blow up if counted
  CHECK(error_multi({ref3}, {rec3}) ==
        doctest::Approx(std::sqrt(0.29)).epsilon(1e-14));
  Vector e = error_ave_rel({ref3}, {rec3});
  CHECK(e[1] == 0.0);
  // The signed defect has no denominator and keeps the row.
  Vector c = error_ave_con({ref3}, {rec3});
  CHECK(c[1] == -18.0);
}

TEST_CASE("metrics validate their shapes") {
  std::vector<Matrix> ref = {rows2(1, 2, 3, 4)};
  std::vector<Matrix> rec = {Matrix::Zero(3, 2)};
  CHECK_THROWS_AS(error_multi(ref, rec), std::invalid_argument);
  CHECK_THROWS_AS(error_multi({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(error_ave_rel(ref, {}), std::invalid_argument);
}

}  // TEST_SUITE("metrics")
