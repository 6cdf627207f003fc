#include "gapnet/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gapnet/error.hpp"

namespace gapnet {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ValidationError("matrix data length " + std::to_string(data_.size()) + " does not match " +
                              std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::select_columns(std::span<const std::size_t> columns) const {
    Matrix out(rows_, columns.size());
    for (std::size_t c : columns) {
        if (c >= cols_) throw ValidationError("column index " + std::to_string(c) + " out of range");
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        const double* src = data_.data() + r * cols_;
        double* dst = out.data() + r * columns.size();
        for (std::size_t j = 0; j < columns.size(); ++j) dst[j] = src[columns[j]];
    }
    return out;
}

Matrix Matrix::select_rows(std::span<const std::size_t> rows) const {
    Matrix out(rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= rows_) throw ValidationError("row index " + std::to_string(rows[i]) + " out of range");
        std::copy_n(data_.data() + rows[i] * cols_, cols_, out.data() + i * cols_);
    }
    return out;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix hconcat(std::span<const Matrix> blocks) {
    if (blocks.empty()) return {};
    const std::size_t rows = blocks.front().rows();
    std::size_t cols = 0;
    for (const auto& b : blocks) {
        if (b.rows() != rows) throw ValidationError("hconcat: row count mismatch");
        cols += b.cols();
    }
    Matrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        double* dst = out.data() + r * cols;
        for (const auto& b : blocks) {
            std::copy_n(b.data() + r * b.cols(), b.cols(), dst);
            dst += b.cols();
        }
    }
    return out;
}

}  // namespace gapnet
