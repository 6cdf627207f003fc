#include "gapnet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <array>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "gapnet/error.hpp"
#include "gapnet/random.hpp"

namespace gapnet {
namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string cell_ref(std::size_t row, const std::string& column) {
    return "row " + std::to_string(row) + ", column '" + column + "'";
}

}  // namespace

GappedDataset::GappedDataset(std::vector<std::string> feature_names, std::vector<double> values,
                             std::vector<std::uint8_t> present, std::vector<int> labels)
    : names_(std::move(feature_names)), values_(std::move(values)), present_(std::move(present)),
      labels_(std::move(labels)) {
    if (names_.empty()) throw ValidationError("dataset needs at least one feature");
    if (labels_.empty()) throw ValidationError("dataset needs at least one row");
    const std::size_t cells = names_.size() * labels_.size();
    if (values_.size() != cells || present_.size() != cells)
        throw ValidationError("dataset value/mask size does not match rows x features");
    for (int y : labels_)
        if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
    std::set<std::string> seen;
    for (const auto& n : names_)
        if (!seen.insert(n).second) throw ValidationError("duplicate feature name '" + n + "'");
    for (std::size_t i = 0; i < cells; ++i) {
        if (!present_[i]) {
            values_[i] = kMissing;
        } else if (!std::isfinite(values_[i])) {
            throw ValidationError("non-finite value in row " + std::to_string(i / names_.size() + 1) + ", feature '" +
                                  names_[i % names_.size()] + "'");
        }
    }
}

GappedDataset GappedDataset::from_complete(std::vector<std::string> feature_names, const Matrix& values,
                                           std::vector<int> labels) {
    if (values.cols() != feature_names.size() || values.rows() != labels.size())
        throw ValidationError("from_complete: shape mismatch");
    std::vector<double> v(values.values().begin(), values.values().end());
    std::vector<std::uint8_t> p(v.size(), 1);
    return GappedDataset(std::move(feature_names), std::move(v), std::move(p), std::move(labels));
}

std::optional<std::size_t> GappedDataset::feature_index(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

double GappedDataset::value(std::size_t row, std::size_t feature) const {
    const std::size_t i = row * names_.size() + feature;
    if (!present_[i]) {
        std::fprintf(stderr, "gapnet: read of absent cell (row %zu, feature %zu)\n", row, feature);
        std::abort();
    }
    return values_[i];
}

void GappedDataset::mark_missing(std::size_t row, std::size_t feature) {
    const std::size_t i = row * names_.size() + feature;
    present_[i] = 0;
    values_[i] = kMissing;
}

void GappedDataset::set_value(std::size_t row, std::size_t feature, double v) {
    const std::size_t i = row * names_.size() + feature;
    present_[i] = 1;
    values_[i] = v;
}

std::size_t GappedDataset::missing_count() const noexcept {
    return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), std::uint8_t{0}));
}

bool operator==(const GappedDataset& a, const GappedDataset& b) {
    if (a.names_ != b.names_ || a.labels_ != b.labels_ || a.present_ != b.present_) return false;
    for (std::size_t i = 0; i < a.values_.size(); ++i)
        if (a.present_[i] && std::memcmp(&a.values_[i], &b.values_[i], sizeof(double)) != 0) return false;
    return true;
}

// --- CSV --------------------------------------------------------------------

GappedDataset parse_csv(const std::string& text, const CsvOptions& options) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("csv: missing header row");
    auto header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    std::size_t label_col = header.size();
    std::vector<std::string> names;
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == options.label_column) {
            if (label_col != header.size()) throw ValidationError("csv: label column appears twice");
            label_col = c;
        } else {
            names.push_back(header[c]);
            feature_cols.push_back(c);
        }
    }
    if (label_col == header.size()) throw ValidationError("csv: no label column '" + options.label_column + "'");
    {
        std::set<std::string> seen;
        for (const auto& n : names)
            if (!seen.insert(n).second) throw ValidationError("csv: duplicate feature name '" + n + "'");
    }

    std::vector<double> values;
    std::vector<std::uint8_t> present;
    std::vector<int> labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ValidationError("csv: row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                                  " fields, header has " + std::to_string(header.size()));
        }
        const std::string label = trim(fields[label_col]);
        if (label.empty() || label == options.missing_token)
            throw ValidationError("csv: missing label at row " + std::to_string(row));
        if (label == "0") {
            labels.push_back(0);
        } else if (label == "1") {
            labels.push_back(1);
        } else {
            throw ValidationError("csv: label '" + label + "' at row " + std::to_string(row) + " is not 0 or 1");
        }
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            const std::string cell = trim(fields[feature_cols[j]]);
            if (cell.empty() || cell == options.missing_token) {
                values.push_back(kMissing);
                present.push_back(0);
                continue;
            }
            double v = 0.0;
            const char* first = cell.data();
            const char* last = first + cell.size();
            if (*first == '+') ++first;
            const auto res = std::from_chars(first, last, v);
            if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v))
                throw ValidationError("csv: cannot parse '" + cell + "' at " + cell_ref(row, names[j]));
            values.push_back(v);
            present.push_back(1);
        }
    }
    if (labels.empty()) throw ValidationError("csv: no data rows");
    return GappedDataset(std::move(names), std::move(values), std::move(present), std::move(labels));
}

GappedDataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), options);
}

std::string to_csv(const GappedDataset& ds, const CsvOptions& options) {
    std::string out;
    for (const auto& n : ds.feature_names()) {
        out += quote_if_needed(n);
        out += ',';
    }
    out += quote_if_needed(options.label_column);
    out += '\n';
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (std::size_t c = 0; c < ds.features(); ++c) {
            if (ds.is_present(r, c)) out += format_double(ds.value(r, c));
            out += ',';
        }
        out += ds.label(r) == 1 ? '1' : '0';
        out += '\n';
    }
    return out;
}

void save_csv(const GappedDataset& ds, const std::filesystem::path& path, const CsvOptions& options) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << to_csv(ds, options);
}

// --- row selection ----------------------------------------------------------

RowIndices complete_rows(const GappedDataset& ds) {
    FeatureIndices all(ds.features());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return complete_rows_for(ds, all);
}

RowIndices complete_rows_for(const GappedDataset& ds, std::span<const std::size_t> features) {
    for (std::size_t f : features)
        if (f >= ds.features()) throw ValidationError("feature index " + std::to_string(f) + " out of range");
    RowIndices out;
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        if (std::all_of(features.begin(), features.end(), [&](std::size_t f) { return ds.is_present(r, f); }))
            out.push_back(r);
    }
    return out;
}

RowIndices without(std::span<const std::size_t> rows, std::span<const std::size_t> excluded) {
    RowIndices a(rows.begin(), rows.end());
    RowIndices b(excluded.begin(), excluded.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    RowIndices out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

DataSplit split(const GappedDataset& ds, double test_fraction, std::uint64_t seed, bool stratified) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("split: test fraction must be in (0, 1)");
    const RowIndices complete = complete_rows(ds);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(complete.size())));
    if (n_test == 0 || n_test >= complete.size()) {
        throw ValidationError("split: " + std::to_string(complete.size()) +
                              " complete rows are too few for test fraction " + std::to_string(test_fraction));
    }
    RandomStream rng(seed);
    RowIndices test;
    if (!stratified) {
        RowIndices pool = complete;
        std::shuffle(pool.begin(), pool.end(), rng);
        test.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_test));
    } else {
        std::array<RowIndices, 2> by_class;
        for (std::size_t r : complete) by_class[static_cast<std::size_t>(ds.label(r))].push_back(r);
        // Largest-remainder allocation keeps the total exact and each class within one row of its share.
        std::array<std::size_t, 2> quota{};
        std::array<double, 2> remainder{};
        std::size_t allocated = 0;
        for (std::size_t c = 0; c < 2; ++c) {
            const double share = static_cast<double>(n_test) * static_cast<double>(by_class[c].size()) /
                                 static_cast<double>(complete.size());
            quota[c] = static_cast<std::size_t>(std::floor(share));
            remainder[c] = share - static_cast<double>(quota[c]);
            allocated += quota[c];
        }
        while (allocated < n_test) {
            const std::size_t c = remainder[1] > remainder[0] ? 1 : 0;
            ++quota[c];
            remainder[c] = -1.0;
            ++allocated;
        }
        for (std::size_t c = 0; c < 2; ++c) {
            if (quota[c] == 0 || quota[c] >= by_class[c].size() + 1) {
                throw ValidationError("split: too few complete rows of class " + std::to_string(c) +
                                      " for a stratified test set");
            }
        }
        for (std::size_t c = 0; c < 2; ++c) {
            RowIndices pool = by_class[c];
            std::shuffle(pool.begin(), pool.end(), rng);
            test.insert(test.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(quota[c]));
        }
    }
    std::sort(test.begin(), test.end());
    RowIndices all(ds.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return DataSplit{without(all, test), std::move(test), seed};
}

// --- normalization ----------------------------------------------------------

NormalizationStats compute_stats(const GappedDataset& ds, std::span<const std::size_t> rows) {
    NormalizationStats stats;
    stats.mean.assign(ds.features(), 0.0);
    stats.stddev.assign(ds.features(), 1.0);
    for (std::size_t f = 0; f < ds.features(); ++f) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t r : rows)
            if (ds.is_present(r, f)) {
                sum += ds.value(r, f);
                ++n;
            }
        if (n == 0) continue;
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r : rows)
            if (ds.is_present(r, f)) {
                const double d = ds.value(r, f) - mean;
                ss += d * d;
            }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        stats.mean[f] = mean;
        stats.stddev[f] = sd > 0.0 ? sd : 1.0;
    }
    return stats;
}

namespace {

template <typename Fn>
GappedDataset transform_present(const GappedDataset& ds, const NormalizationStats& stats, Fn fn) {
    if (stats.mean.size() != ds.features() || stats.stddev.size() != ds.features())
        throw ValidationError("normalization stats do not match feature count");
    GappedDataset out = ds;
    for (std::size_t r = 0; r < ds.rows(); ++r)
        for (std::size_t f = 0; f < ds.features(); ++f)
            if (ds.is_present(r, f)) out.set_value(r, f, fn(ds.value(r, f), stats.mean[f], stats.stddev[f]));
    return out;
}

}  // namespace

GappedDataset normalize(const GappedDataset& ds, const NormalizationStats& stats) {
    return transform_present(ds, stats, [](double x, double m, double s) { return (x - m) / s; });
}

GappedDataset denormalize(const GappedDataset& ds, const NormalizationStats& stats) {
    return transform_present(ds, stats, [](double x, double m, double s) { return x * s + m; });
}

// --- gathering --------------------------------------------------------------

Matrix gather(const GappedDataset& ds, std::span<const std::size_t> rows, std::span<const std::size_t> columns) {
    Matrix out(rows.size(), columns.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        if (r >= ds.rows()) throw ValidationError("row index " + std::to_string(r) + " out of range");
        for (std::size_t j = 0; j < columns.size(); ++j) {
            const std::size_t f = columns[j];
            if (f >= ds.features()) throw ValidationError("feature index " + std::to_string(f) + " out of range");
            if (!ds.is_present(r, f)) {
                throw ValidationError("row " + std::to_string(r + 1) + " is missing required feature '" +
                                      ds.feature_names()[f] + "'");
            }
            out(i, j) = ds.value(r, f);
        }
    }
    return out;
}

Matrix gather_full_width(const GappedDataset& ds, std::span<const std::size_t> rows,
                         std::span<const std::size_t> used) {
    const Matrix compact = gather(ds, rows, used);
    Matrix out(rows.size(), ds.features(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < used.size(); ++j) out(i, used[j]) = compact(i, j);
    return out;
}

std::vector<int> labels_for(const GappedDataset& ds, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(ds.label(r));
    return out;
}

}  // namespace gapnet
