#include "mghga/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <cstddef>
#include <string>

#include "mghga/errors.hpp"

namespace mghga::kernels {

namespace {

using index_t = std::ptrdiff_t;

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(std::string(what) + ": incompatible shapes");
}

// out_row += a * b_row
inline void axpy(double a, std::span<const double> b_row, std::span<double> out_row) {
  const std::size_t n = out_row.size();
  const double* b = b_row.data();
  double* o = out_row.data();
  for (std::size_t j = 0; j < n; ++j) o[j] += a * b[j];
}

inline void gemm_row(const Matrix& a, const Matrix& b, std::size_t i, Matrix& out) {
  auto orow = out.row(i);
  auto arow = a.row(i);
  for (std::size_t p = 0; p < arow.size(); ++p) axpy(arow[p], b.row(p), orow);
}

inline void spmm_row(const CsrMatrix& a, const Matrix& b, std::size_t i, Matrix& out) {
  auto orow = out.row(i);
  for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
    axpy(a.values[p], b.row(a.col_idx[p]), orow);
}

}  // namespace

// ---------------------------------------------------------------------------
// serial reference
// ---------------------------------------------------------------------------

namespace serial {

Matrix gemm(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "gemm");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) gemm_row(a, b, i, out);
  return out;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "gemm_tn");
  Matrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p) axpy(arow[p], b.row(i), out.row(p));
  }
  return out;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "gemm_nt");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(j, p);
      out(i, j) = s;
    }
  }
  return out;
}

Matrix spmm(const CsrMatrix& a, const Matrix& b) {
  require(a.cols == b.rows(), "spmm");
  Matrix out(a.rows, b.cols());
  for (std::size_t i = 0; i < a.rows; ++i) spmm_row(a, b, i, out);
  return out;
}

Matrix spmm_tn(const CsrMatrix& a, const Matrix& b) {
  require(a.rows == b.rows(), "spmm_tn");
  Matrix out(a.cols, b.cols());
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
      axpy(a.values[p], b.row(i), out.row(a.col_idx[p]));
  return out;
}

Matrix pairwise_distances(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) {
        const double diff = x(i, k) - x(j, k);
        s += diff * diff;
      }
      out(i, j) = std::sqrt(s);
    }
  }
  return out;
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP
// ---------------------------------------------------------------------------

Matrix gemm(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "gemm");
  Matrix out(a.rows(), b.cols());
  const auto m = static_cast<index_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < m; ++i) gemm_row(a, b, static_cast<std::size_t>(i), out);
  return out;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "gemm_tn");
  Matrix out(a.cols(), b.cols());
  const auto k = static_cast<index_t>(a.cols());
  // Each output row p sums over the rows of A in ascending order, exactly as the
  // scatter loop of the reference does.
#pragma omp parallel for schedule(static)
  for (index_t p = 0; p < k; ++p) {
    auto orow = out.row(static_cast<std::size_t>(p));
    for (std::size_t i = 0; i < a.rows(); ++i)
      axpy(a(i, static_cast<std::size_t>(p)), b.row(i), orow);
  }
  return out;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "gemm_nt");
  const Matrix bt = b.transposed();
  Matrix out(a.rows(), b.rows());
  const auto m = static_cast<index_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < m; ++i) gemm_row(a, bt, static_cast<std::size_t>(i), out);
  return out;
}

Matrix spmm(const CsrMatrix& a, const Matrix& b) {
  require(a.cols == b.rows(), "spmm");
  Matrix out(a.rows, b.cols());
  const auto m = static_cast<index_t>(a.rows);
#pragma omp parallel for schedule(dynamic, 64)
  for (index_t i = 0; i < m; ++i) spmm_row(a, b, static_cast<std::size_t>(i), out);
  return out;
}

Matrix spmm_tn(const CsrMatrix& a, const Matrix& b) {
  require(a.rows == b.rows(), "spmm_tn");
  // The transpose lists each column's entries by ascending source row, which
  // matches the reference scatter order.
  return spmm(a.transposed(), b);
}

double row_distance(const CsrMatrix& x, std::size_t i, std::size_t j) {
  std::size_t p = x.row_ptr[i];
  std::size_t q = x.row_ptr[j];
  const std::size_t pe = x.row_ptr[i + 1];
  const std::size_t qe = x.row_ptr[j + 1];
  double s = 0.0;
  while (p < pe || q < qe) {
    double diff;
    if (q == qe || (p < pe && x.col_idx[p] < x.col_idx[q])) {
      diff = x.values[p++];
    } else if (p == pe || x.col_idx[q] < x.col_idx[p]) {
      diff = 0.0 - x.values[q++];
    } else {
      diff = x.values[p++] - x.values[q++];
    }
    s += diff * diff;
  }
  return std::sqrt(s);
}

void distance_row(const CsrMatrix& x, std::size_t i, std::span<double> out) {
  require(out.size() == x.rows, "distance_row");
  for (std::size_t j = 0; j < x.rows; ++j) out[j] = row_distance(x, i, j);
}

Matrix pairwise_distances(const CsrMatrix& x) {
  const std::size_t n = x.rows;
  Matrix out(n, n);
  const auto m = static_cast<index_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (index_t i = 0; i < m; ++i) distance_row(x, static_cast<std::size_t>(i), out.row(static_cast<std::size_t>(i)));
  return out;
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace mghga::kernels
