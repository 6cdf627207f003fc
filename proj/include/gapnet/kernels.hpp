#pragma once

#include <vector>

#include "gapnet/matrix.hpp"

// Dense-layer GEMM kernels. The default versions split rows of the output
// across OpenMP threads; the `reference` versions are plain serial loops kept
// for testing and benchmarking. Both accumulate every output element in the
// same order, so results are bit-identical for any thread count.
namespace gapnet::kernels {

/// a (n x k) * b (k x m) -> n x m
Matrix matmul(const Matrix& a, const Matrix& b);
/// transpose(a) (k x n) * b (n x m) -> k x m
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a (n x m) * transpose(b) (m x k) -> n x k
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// Per-column sums of a.
std::vector<double> column_sums(const Matrix& a);

/// Adds `bias` to every row of m in place.
void add_row_vector(Matrix& m, const std::vector<double>& bias);

namespace reference {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
std::vector<double> column_sums(const Matrix& a);
}  // namespace reference

/// Number of threads the parallel kernels will use (1 when built without OpenMP).
int max_threads();

}  // namespace gapnet::kernels
