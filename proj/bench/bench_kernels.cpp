// Serial reference kernels against their OpenMP counterparts. The first
// argument is the dimension d, the second the number of columns n.

#include "naa/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

naa::Matrix random_matrix(naa::Index rows, naa::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  naa::Matrix M(rows, cols);
  for (naa::Index j = 0; j < cols; ++j)
    for (naa::Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
  return M;
}

struct Inputs {
  explicit Inputs(const benchmark::State& state)
      : d(state.range(0)), n(state.range(1)), Q(random_matrix(d, d, 1)), X(random_matrix(d, n, 2)),
        Y(random_matrix(d, n, 3)), w(random_matrix(n, 1, 4).cwiseAbs()), valid(static_cast<std::size_t>(n), 1) {}
  naa::Index d, n;
  naa::Matrix Q, X, Y;
  naa::Vector w;
  std::vector<char> valid;
};

template <bool Serial>
void BM_ColumnSqResiduals(benchmark::State& state) {
  const Inputs in(state);
  for (auto _ : state) {
    auto r = Serial ? naa::kernels::serial::column_sq_residuals(in.Q, in.X, in.Y)
                    : naa::kernels::column_sq_residuals(in.Q, in.X, in.Y);
    benchmark::DoNotOptimize(r.data());
  }
}

template <bool Serial>
void BM_WeightedCrossCovariance(benchmark::State& state) {
  const Inputs in(state);
  for (auto _ : state) {
    auto m = Serial ? naa::kernels::serial::weighted_cross_covariance(in.Y, in.X, in.w)
                    : naa::kernels::weighted_cross_covariance(in.Y, in.X, in.w);
    benchmark::DoNotOptimize(m.data());
  }
}

template <bool Serial>
void BM_ColumnSqDistances(benchmark::State& state) {
  const Inputs in(state);
  const naa::Vector mu = in.Y.rowwise().mean();
  for (auto _ : state) {
    auto r = Serial ? naa::kernels::serial::column_sq_distances(in.Y, mu)
                    : naa::kernels::column_sq_distances(in.Y, mu);
    benchmark::DoNotOptimize(r.data());
  }
}

template <bool Serial>
void BM_BestMatch(benchmark::State& state) {
  const Inputs in(state);
  const naa::Matrix queries = in.X.leftCols(std::min<naa::Index>(in.n, 256));
  for (auto _ : state) {
    auto b = Serial ? naa::kernels::serial::best_match(in.Y, in.valid, queries, true)
                    : naa::kernels::best_match(in.Y, in.valid, queries, true);
    benchmark::DoNotOptimize(b.data());
  }
}

void sizes(benchmark::internal::Benchmark* b) {
  b->Args({50, 1000})->Args({300, 5000})->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK(BM_ColumnSqResiduals<true>)->Name("column_sq_residuals/serial")->Apply(sizes);
BENCHMARK(BM_ColumnSqResiduals<false>)->Name("column_sq_residuals/omp")->Apply(sizes);
BENCHMARK(BM_WeightedCrossCovariance<true>)->Name("weighted_cross_covariance/serial")->Apply(sizes);
BENCHMARK(BM_WeightedCrossCovariance<false>)->Name("weighted_cross_covariance/omp")->Apply(sizes);
BENCHMARK(BM_ColumnSqDistances<true>)->Name("column_sq_distances/serial")->Apply(sizes);
BENCHMARK(BM_ColumnSqDistances<false>)->Name("column_sq_distances/omp")->Apply(sizes);
BENCHMARK(BM_BestMatch<true>)->Name("best_match/serial")->Apply(sizes);
BENCHMARK(BM_BestMatch<false>)->Name("best_match/omp")->Apply(sizes);

BENCHMARK_MAIN();
