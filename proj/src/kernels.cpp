#include "gapnet/kernels.hpp"

#include <string>

#include "gapnet/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gapnet::kernels {
namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr long kParallelWork = 1L << 15;

void check(bool ok, const char* op, const Matrix& a, const Matrix& b) {
    if (!ok) {
        throw ValidationError(std::string(op) + ": incompatible shapes " + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                              std::to_string(b.cols()));
    }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    check(a.cols() == b.rows(), "matmul", a, b);
    const long n = static_cast<long>(a.rows());
    const std::size_t k = a.cols(), m = b.cols();
    Matrix c(a.rows(), m);
    const double* ad = a.data();
    const double* bd = b.data();
    double* cd = c.data();
#pragma omp parallel for schedule(static) if (n * static_cast<long>(k * m) > kParallelWork)
    for (long i = 0; i < n; ++i) {
        double* crow = cd + i * m;
        const double* arow = ad + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = bd + p * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check(a.rows() == b.rows(), "matmul_tn", a, b);
    const std::size_t n = a.rows(), m = b.cols();
    const long k = static_cast<long>(a.cols());
    Matrix c(a.cols(), m);
    const double* ad = a.data();
    const double* bd = b.data();
    double* cd = c.data();
#pragma omp parallel for schedule(static) if (k * static_cast<long>(n * m) > kParallelWork)
    for (long p = 0; p < k; ++p) {
        double* crow = cd + p * m;
        for (std::size_t i = 0; i < n; ++i) {
            const double av = ad[i * k + p];
            const double* brow = bd + i * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check(a.cols() == b.cols(), "matmul_nt", a, b);
    const long n = static_cast<long>(a.rows());
    const std::size_t m = a.cols(), k = b.rows();
    Matrix c(a.rows(), k);
    const double* ad = a.data();
    const double* bd = b.data();
    double* cd = c.data();
#pragma omp parallel for schedule(static) if (n * static_cast<long>(k * m) > kParallelWork)
    for (long i = 0; i < n; ++i) {
        const double* arow = ad + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double* brow = bd + p * m;
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += arow[j] * brow[j];
            cd[i * k + p] = s;
        }
    }
    return c;
}

std::vector<double> column_sums(const Matrix& a) {
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += row[j];
    }
    return out;
}

void add_row_vector(Matrix& m, const std::vector<double>& bias) {
    if (bias.size() != m.cols()) throw ValidationError("add_row_vector: bias length mismatch");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        for (std::size_t j = 0; j < bias.size(); ++j) row[j] += bias[j];
    }
}

namespace reference {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check(a.cols() == b.rows(), "matmul", a, b);
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(p, j);
            c(i, j) = s;
        }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check(a.rows() == b.rows(), "matmul_tn", a, b);
    Matrix c(a.cols(), b.cols());
    for (std::size_t p = 0; p < a.cols(); ++p)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, p) * b(i, j);
            c(p, j) = s;
        }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check(a.cols() == b.cols(), "matmul_nt", a, b);
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t p = 0; p < b.rows(); ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * b(p, j);
            c(i, p) = s;
        }
    return c;
}

std::vector<double> column_sums(const Matrix& a) {
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) out[j] += a(i, j);
    return out;
}

}  // namespace reference

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace gapnet::kernels
