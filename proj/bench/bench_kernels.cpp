// Serial reference kernels against the OpenMP versions, at the layer shapes
// a 40-input network sees with a full-batch pass over 1000 rows.

#include <benchmark/benchmark.h>

#include <random>

#include "gapnet/kernels.hpp"

using namespace gapnet;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(r, c);
    for (double& v : m.values()) v = u(rng);
    return m;
}

// args: rows, inner, cols
template <Matrix (*Kernel)(const Matrix&, const Matrix&)>
void BM_matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const auto m = static_cast<std::size_t>(state.range(2));
    const Matrix a = random_matrix(n, k, 1), b = random_matrix(k, m, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * k * m));
    state.counters["threads"] = kernels::max_threads();
}

// gradient of the weights: a is n x k activations, b is n x m deltas
template <Matrix (*Kernel)(const Matrix&, const Matrix&)>
void BM_matmul_tn(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const auto m = static_cast<std::size_t>(state.range(2));
    const Matrix a = random_matrix(n, k, 1), b = random_matrix(n, m, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * k * m));
}

// delta propagation: a is n x m deltas, b is k x m weights
template <Matrix (*Kernel)(const Matrix&, const Matrix&)>
void BM_matmul_nt(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const auto m = static_cast<std::size_t>(state.range(2));
    const Matrix a = random_matrix(n, m, 1), b = random_matrix(k, m, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * k * m));
}

void shapes(benchmark::internal::Benchmark* b) {
    b->Args({1000, 40, 80})->Args({1000, 80, 80})->Args({1000, 80, 1})->Args({64, 25, 50})->Args({4096, 256, 256});
}

}  // namespace

BENCHMARK(BM_matmul<kernels::reference::matmul>)->Name("matmul/serial")->Apply(shapes);
BENCHMARK(BM_matmul<kernels::matmul>)->Name("matmul/openmp")->Apply(shapes);
BENCHMARK(BM_matmul_tn<kernels::reference::matmul_tn>)->Name("matmul_tn/serial")->Apply(shapes);
BENCHMARK(BM_matmul_tn<kernels::matmul_tn>)->Name("matmul_tn/openmp")->Apply(shapes);
BENCHMARK(BM_matmul_nt<kernels::reference::matmul_nt>)->Name("matmul_nt/serial")->Apply(shapes);
BENCHMARK(BM_matmul_nt<kernels::matmul_nt>)->Name("matmul_nt/openmp")->Apply(shapes);

BENCHMARK_MAIN();
