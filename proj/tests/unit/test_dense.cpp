#include "amgcn/dense.hpp"

#include "amgcn/error.hpp"
#include "amgcn/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using amgcn::DenseMatrix;

TEST_CASE("dense: construction and element access") {
  DenseMatrix m{{1, 2, 3}, {4, 5, 6}};
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6);
  CHECK(m.row(1)[0] == 4);
  CHECK(DenseMatrix::identity(3)(1, 1) == 1.0);
  CHECK(DenseMatrix::identity(3)(0, 1) == 0.0);
  CHECK_THROWS_AS(DenseMatrix(2, 2, std::vector<double>(3)), amgcn::Error);
}

TEST_CASE("dense: products agree with the naive oracle") {
  amgcn::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t r = 1 + rng.below(7), k = 1 + rng.below(7), c = 1 + rng.below(7);
    const DenseMatrix a = oracle::random_matrix(rng, r, k);
    const DenseMatrix b = oracle::random_matrix(rng, k, c);
    const DenseMatrix bt = oracle::transposed(b);
    const DenseMatrix at = oracle::transposed(a);
    const DenseMatrix want = oracle::product(a, b);
    CHECK(oracle::near(amgcn::matmul(a, b), want, 1e-12));
    CHECK(oracle::near(amgcn::matmul_tn(at, b), want, 1e-12));
    CHECK(oracle::near(amgcn::matmul_nt(a, bt), want, 1e-12));
    CHECK(amgcn::transpose(a) == at);
  }
}

TEST_CASE("dense: shape mismatches are reported") {
  const DenseMatrix a(2, 3), b(2, 3);
  try {
    (void)amgcn::matmul(a, b);
    FAIL("expected throw");
  } catch (const amgcn::Error& e) {
    CHECK(e.code() == amgcn::ErrorCode::DimensionMismatch);
  }
  CHECK_THROWS_AS(amgcn::hadamard(a, DenseMatrix(3, 2)), amgcn::Error);
  DenseMatrix c(2, 3);
  CHECK_THROWS_AS(c += DenseMatrix(3, 3), amgcn::Error);
}

TEST_CASE("dense: elementwise helpers") {
  DenseMatrix a{{1, -2}, {3, 4}};
  DenseMatrix b{{2, 2}, {2, 2}};
  CHECK(amgcn::hadamard(a, b) == DenseMatrix{{2, -4}, {6, 8}});
  CHECK(amgcn::frobenius_sq(a) == doctest::Approx(30.0));
  CHECK(amgcn::max_abs_diff(a, b) == doctest::Approx(4.0));
  amgcn::axpy(0.5, b, a);
  CHECK(a == DenseMatrix{{2, -1}, {4, 5}});
  CHECK((a - a) == DenseMatrix(2, 2));
  CHECK((2.0 * b)(1, 1) == 4.0);
  a(0, 0) = std::nan("");
  CHECK_FALSE(a.all_finite());
}
