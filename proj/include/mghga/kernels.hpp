#pragma once

#include <cstddef>
#include <span>

#include "mghga/matrix.hpp"

// Dense and sparse linear-algebra kernels used by hypergraph construction and
// the HGNN forward/backward passes.
//
// Every kernel exists twice: a straightforward single-threaded reference in
// `kernels::serial`, and an OpenMP version in `kernels`. The OpenMP versions
// parallelise over output rows only and keep the per-element accumulation
// order of the reference, so both produce bit-identical results for any
// thread count. Tests and benchmarks rely on that.
namespace mghga::kernels {

namespace serial {

// A (m x k) * B (k x n)
Matrix gemm(const Matrix& a, const Matrix& b);
// A^T * B, with A (m x k), B (m x n)
Matrix gemm_tn(const Matrix& a, const Matrix& b);
// A * B^T, with A (m x k), B (n x k)
Matrix gemm_nt(const Matrix& a, const Matrix& b);
// sparse A (m x k) * dense B (k x n)
Matrix spmm(const CsrMatrix& a, const Matrix& b);
// sparse A^T * dense B, with A (m x k), B (m x n); scatter formulation
Matrix spmm_tn(const CsrMatrix& a, const Matrix& b);
// Euclidean distances between all row pairs, plain double loop over columns.
Matrix pairwise_distances(const Matrix& x);

}  // namespace serial

Matrix gemm(const Matrix& a, const Matrix& b);
Matrix gemm_tn(const Matrix& a, const Matrix& b);
Matrix gemm_nt(const Matrix& a, const Matrix& b);
Matrix spmm(const CsrMatrix& a, const Matrix& b);
Matrix spmm_tn(const CsrMatrix& a, const Matrix& b);

// Squared-difference sum between rows i and j, merged over the union of their
// nonzero columns in ascending order. Skipped columns only ever contribute an
// exact 0.0, so the result equals the dense column loop bit for bit.
double row_distance(const CsrMatrix& x, std::size_t i, std::size_t j);

// Distances from row i to every row, written to out (size x.rows).
void distance_row(const CsrMatrix& x, std::size_t i, std::span<double> out);

Matrix pairwise_distances(const CsrMatrix& x);

// Number of OpenMP threads the parallel kernels will use.
int max_threads();

}  // namespace mghga::kernels
