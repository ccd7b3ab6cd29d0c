#include <gtest/gtest.h>

#include <random>

#include "mghga/kernels.hpp"
#include "oracle.hpp"

using namespace mghga;

namespace {

Matrix sparse_random(std::size_t r, std::size_t c, std::mt19937_64& rng, double density) {
  Matrix m(r, c);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  for (double& v : m.values()) v = u(rng) < density ? g(rng) : 0.0;
  return m;
}

}  // namespace

TEST(Kernels, ParallelMatchesSerialBitForBit) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix a = oracle::random_matrix(37, 19, rng);
    const Matrix b = oracle::random_matrix(19, 23, rng);
    const Matrix c = oracle::random_matrix(37, 23, rng);
    const Matrix bt = oracle::random_matrix(23, 19, rng);
    EXPECT_EQ(kernels::gemm(a, b), kernels::serial::gemm(a, b));
    EXPECT_EQ(kernels::gemm_tn(a, c), kernels::serial::gemm_tn(a, c));
    EXPECT_EQ(kernels::gemm_nt(a, bt), kernels::serial::gemm_nt(a, bt));

    const CsrMatrix s = CsrMatrix::from_dense(sparse_random(37, 37, rng, 0.2));
    EXPECT_EQ(kernels::spmm(s, c), kernels::serial::spmm(s, c));
    EXPECT_EQ(kernels::spmm_tn(s, c), kernels::serial::spmm_tn(s, c));
  }
}

TEST(Kernels, GemmVariantsAgreeWithPlainLoops) {
  std::mt19937_64 rng(3);
  const Matrix a = oracle::random_matrix(6, 4, rng);
  const Matrix b = oracle::random_matrix(4, 5, rng);
  const Matrix c = oracle::random_matrix(6, 5, rng);
  const auto da = oracle::from(a), db = oracle::from(b), dc = oracle::from(c);
  EXPECT_LT(oracle::max_abs(oracle::matmul(da, db), kernels::gemm(a, b)), 1e-12);
  EXPECT_LT(oracle::max_abs(oracle::matmul(oracle::transpose(da), dc), kernels::gemm_tn(a, c)), 1e-12);
  EXPECT_LT(oracle::max_abs(oracle::matmul(dc, oracle::transpose(db)), kernels::gemm_nt(c, b)), 1e-12);
  const CsrMatrix s = CsrMatrix::from_dense(sparse_random(6, 6, rng, 0.4));
  EXPECT_LT(oracle::max_abs(oracle::matmul(oracle::from(s.to_dense()), dc), kernels::spmm(s, c)), 1e-12);
  EXPECT_LT(oracle::max_abs(oracle::matmul(oracle::transpose(oracle::from(s.to_dense())), dc), kernels::spmm_tn(s, c)),
            1e-12);
}

TEST(Kernels, SparseDistancesEqualDenseLoop) {
  std::mt19937_64 rng(11);
  const Matrix x = sparse_random(40, 30, rng, 0.15);
  const Matrix dense = kernels::serial::pairwise_distances(x);
  EXPECT_EQ(kernels::pairwise_distances(CsrMatrix::from_dense(x)), dense);
}

TEST(Kernels, CsrRoundTripAndTranspose) {
  std::mt19937_64 rng(5);
  const Matrix m = sparse_random(9, 7, rng, 0.3);
  const CsrMatrix s = CsrMatrix::from_dense(m);
  EXPECT_EQ(s.to_dense(), m);
  EXPECT_EQ(s.transposed().to_dense(), m.transposed());
}
