// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "termforge/kernels.hpp"
#include "termforge/matrix.hpp"

using namespace termforge;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Matrix m(rows, cols);
  for (auto& x : m.data()) x = u(rng);
  return m;
}

template <Matrix (*F)(const Matrix&, const Matrix&)>
void BM_gemm_nn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(F(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <Matrix (*F)(const Matrix&)>
void BM_pairwise(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 100, 3);
  for (auto _ : state) benchmark::DoNotOptimize(F(x));
}

template <kernels::Assignment (*F)(const Matrix&, const Matrix&)>
void BM_nearest_centroid(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 100, 4);
  const Matrix c = random_matrix(50, 100, 5);
  for (auto _ : state) benchmark::DoNotOptimize(F(x, c));
}

template <void (*R)(const Matrix&, const Matrix&, Matrix&, double), void (*A)(const Matrix&, Matrix&, double)>
void BM_ap_messages(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix s = random_matrix(n, n, 6);
  Matrix r(n, n), a(n, n);
  for (auto _ : state) {
    R(s, a, r, 0.9);
    A(r, a, 0.9);
    benchmark::ClobberMemory();
  }
}

}  // namespace

BENCHMARK(BM_gemm_nn<kernels::serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(128)->Arg(256);
BENCHMARK(BM_gemm_nn<kernels::omp::gemm_nn>)->Name("gemm_nn/omp")->Arg(128)->Arg(256);
BENCHMARK(BM_pairwise<kernels::serial::pairwise_cosine_dissimilarity>)->Name("pairwise/serial")->Arg(500)->Arg(1000);
BENCHMARK(BM_pairwise<kernels::omp::pairwise_cosine_dissimilarity>)->Name("pairwise/omp")->Arg(500)->Arg(1000);
BENCHMARK(BM_nearest_centroid<kernels::serial::nearest_centroid>)->Name("nearest_centroid/serial")->Arg(5000);
BENCHMARK(BM_nearest_centroid<kernels::omp::nearest_centroid>)->Name("nearest_centroid/omp")->Arg(5000);
BENCHMARK(BM_ap_messages<kernels::serial::ap_responsibilities, kernels::serial::ap_availabilities>)
    ->Name("ap_messages/serial")->Arg(500);
BENCHMARK(BM_ap_messages<kernels::omp::ap_responsibilities, kernels::omp::ap_availabilities>)
    ->Name("ap_messages/omp")->Arg(500);

BENCHMARK_MAIN();
