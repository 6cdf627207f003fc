#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapnet/matrix.hpp"

namespace gapnet {

using RowIndices = std::vector<std::size_t>;
using FeatureIndices = std::vector<std::size_t>;

/// N x F feature table with an explicit presence mask and binary labels.
/// Absent cells hold a NaN sentinel; the mask is authoritative and reading an
/// absent cell through value() aborts the process.
class GappedDataset {
public:
    GappedDataset() = default;
    GappedDataset(std::vector<std::string> feature_names, std::vector<double> values, std::vector<std::uint8_t> present,
                  std::vector<int> labels);

    /// Fully present dataset from a dense matrix.
    static GappedDataset from_complete(std::vector<std::string> feature_names, const Matrix& values,
                                       std::vector<int> labels);

    std::size_t rows() const noexcept { return labels_.size(); }
    std::size_t features() const noexcept { return names_.size(); }

    const std::vector<std::string>& feature_names() const noexcept { return names_; }
    std::optional<std::size_t> feature_index(const std::string& name) const;

    const std::vector<int>& labels() const noexcept { return labels_; }
    int label(std::size_t row) const { return labels_[row]; }

    bool is_present(std::size_t row, std::size_t feature) const noexcept {
        return present_[row * names_.size() + feature] != 0;
    }
    double value(std::size_t row, std::size_t feature) const;

    /// Marks a cell absent; the value slot is overwritten with the sentinel.
    void mark_missing(std::size_t row, std::size_t feature);
    void set_value(std::size_t row, std::size_t feature, double v);

    std::size_t missing_count() const noexcept;

    friend bool operator==(const GappedDataset& a, const GappedDataset& b);

private:
    std::vector<std::string> names_;
    std::vector<double> values_;
    std::vector<std::uint8_t> present_;
    std::vector<int> labels_;
};

struct CsvOptions {
    std::string missing_token = "NA";
    std::string label_column = "label";
};

GappedDataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
GappedDataset parse_csv(const std::string& text, const CsvOptions& options = {});
/// Absent cells are written as empty fields; numbers use the shortest
/// round-trip representation.
void save_csv(const GappedDataset& ds, const std::filesystem::path& path, const CsvOptions& options = {});
std::string to_csv(const GappedDataset& ds, const CsvOptions& options = {});

/// Rows where every feature is present, ascending.
RowIndices complete_rows(const GappedDataset& ds);
/// Rows where every listed feature is present, ascending.
RowIndices complete_rows_for(const GappedDataset& ds, std::span<const std::size_t> features);

struct DataSplit {
    RowIndices train_rows;
    RowIndices test_rows;
    std::uint64_t seed = 0;
};

/// Test rows are drawn from complete rows only; every other row trains.
DataSplit split(const GappedDataset& ds, double test_fraction, std::uint64_t seed, bool stratified = true);

/// Sorted a \ b.
RowIndices without(std::span<const std::size_t> rows, std::span<const std::size_t> excluded);

struct NormalizationStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// Per-feature mean and population std over present cells of `rows`.
/// A zero (or undefined) std becomes 1.
NormalizationStats compute_stats(const GappedDataset& ds, std::span<const std::size_t> rows);
GappedDataset normalize(const GappedDataset& ds, const NormalizationStats& stats);
GappedDataset denormalize(const GappedDataset& ds, const NormalizationStats& stats);

/// Dense rows x |columns| block. Every requested cell must be present;
/// otherwise a ValidationError names the first offending row and feature.
Matrix gather(const GappedDataset& ds, std::span<const std::size_t> rows, std::span<const std::size_t> columns);

/// Dense rows x F block where only `used` columns are read; the rest are 0.
Matrix gather_full_width(const GappedDataset& ds, std::span<const std::size_t> rows,
                         std::span<const std::size_t> used);

std::vector<int> labels_for(const GappedDataset& ds, std::span<const std::size_t> rows);

}  // namespace gapnet
