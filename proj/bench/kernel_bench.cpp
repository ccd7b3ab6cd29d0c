// Serial reference vs OpenMP kernels on shapes typical of a Cora-sized run
// (n nodes, d sparse binary features, h hidden units).

#include <benchmark/benchmark.h>

#include <random>

#include "mghga/hypergraph.hpp"
#include "mghga/kernels.hpp"

using namespace mghga;

namespace {

constexpr std::size_t kNodes = 2485, kFeatures = 1433, kHidden = 64;

Matrix dense(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (double& v : m.values()) v = g(rng);
  return m;
}

Matrix sparse_binary(std::size_t r, std::size_t c, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution on(density);
  Matrix m(r, c);
  for (double& v : m.values()) v = on(rng) ? 1.0 : 0.0;
  return m;
}

const Matrix& features() {
  static const Matrix x = sparse_binary(kNodes, kFeatures, 0.0127, 1);
  return x;
}

const CsrMatrix& features_csr() {
  static const CsrMatrix x = CsrMatrix::from_dense(features());
  return x;
}

const CsrMatrix& hhat() {
  static const CsrMatrix h = normalized_operator(build_knn_hypergraph(FeatureMatrix(features()), 10)).csr();
  return h;
}

template <Matrix (*F)(const Matrix&, const Matrix&)>
void BM_gemm_nt(benchmark::State& st) {
  const Matrix a = dense(kNodes, kHidden, 2), b = dense(kFeatures, kHidden, 3);
  for (auto _ : st) benchmark::DoNotOptimize(F(a, b));
}

template <Matrix (*F)(const Matrix&, const Matrix&)>
void BM_gemm_tn(benchmark::State& st) {
  const Matrix a = dense(kNodes, kHidden, 4), b = dense(kNodes, 7, 5);
  for (auto _ : st) benchmark::DoNotOptimize(F(a, b));
}

template <Matrix (*F)(const CsrMatrix&, const Matrix&)>
void BM_spmm_hhat(benchmark::State& st) {
  const Matrix b = dense(kNodes, kHidden, 6);
  const CsrMatrix& h = hhat();
  for (auto _ : st) benchmark::DoNotOptimize(F(h, b));
}

template <Matrix (*F)(const CsrMatrix&, const Matrix&)>
void BM_spmm_features(benchmark::State& st) {
  const Matrix b = dense(kFeatures, kHidden, 7);
  const CsrMatrix& x = features_csr();
  for (auto _ : st) benchmark::DoNotOptimize(F(x, b));
}

void BM_distances_serial(benchmark::State& st) {
  const Matrix x = sparse_binary(600, kFeatures, 0.0127, 8);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::pairwise_distances(x));
}

void BM_distances_parallel(benchmark::State& st) {
  const CsrMatrix x = CsrMatrix::from_dense(sparse_binary(600, kFeatures, 0.0127, 8));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::pairwise_distances(x));
}

}  // namespace

BENCHMARK(BM_gemm_nt<kernels::serial::gemm_nt>)->Name("gemm_nt/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gemm_nt<kernels::gemm_nt>)->Name("gemm_nt/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gemm_tn<kernels::serial::gemm_tn>)->Name("gemm_tn/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gemm_tn<kernels::gemm_tn>)->Name("gemm_tn/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spmm_hhat<kernels::serial::spmm>)->Name("spmm_hhat/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spmm_hhat<kernels::spmm>)->Name("spmm_hhat/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spmm_features<kernels::serial::spmm>)->Name("spmm_features/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spmm_features<kernels::spmm>)->Name("spmm_features/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_distances_serial)->Name("distances/serial_dense")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_distances_parallel)->Name("distances/omp_sparse")->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
