#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gapnet/matrix.hpp"
#include "gapnet/random.hpp"

namespace gapnet {

/// Mann-Whitney AUC: fraction of (positive, negative) pairs ordered
/// correctly, ties counted one half. Needs both classes.
double auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
    double threshold;  // score >= threshold is called positive
    double fpr;
    double tpr;
};

/// Operating points by descending threshold, from (0, 0) to (1, 1).
struct RocCurve {
    std::vector<RocPoint> points;

    /// Trapezoidal area.
    double area() const;
    /// TPR at `fpr`: the highest TPR on a vertical segment at that FPR,
    /// otherwise linear interpolation between neighbouring points.
    double tpr_at(double fpr) const;
};

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

/// Undefined ratios (zero denominator) are absent rather than 0.
struct MetricReport {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> accuracy;
    std::optional<double> precision;
};

ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);
MetricReport metrics(const ConfusionCounts& counts);

/// DeLong structural components of one classifier.
struct StructuralComponents {
    std::vector<double> positive;  // V10: per positive sample
    std::vector<double> negative;  // V01: per negative sample
    double auc = 0.0;
};

/// Midrank-based computation, O(N log N).
StructuralComponents structural_components(std::span<const double> scores, std::span<const int> labels);

struct DelongResult {
    double auc_a = 0.0;
    double auc_b = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    double covariance = 0.0;
    double variance = 0.0;  // of auc_a - auc_b
    double z = 0.0;
    double p = 1.0;         // two-sided
};

/// Paired DeLong test on two score vectors over the same labelled samples.
/// Needs at least two samples of each class.
DelongResult delong_test(std::span<const double> scores_a, std::span<const double> scores_b,
                         std::span<const int> labels);

double normal_cdf(double x);

// --- permutation importance -------------------------------------------------

using Scorer = std::function<std::vector<double>(const Matrix&)>;
/// Rearranges a row order in place; the default draws a uniform shuffle.
using Permuter = std::function<void(std::vector<std::size_t>&)>;

struct PermutationResult {
    double mean_drop = 0.0;
    double std_drop = 0.0;
    bool constant_feature = false;  // column had one value; drop reported as 0
};

PermutationResult permutation_importance(const Scorer& model, const Matrix& inputs, std::span<const int> labels,
                                         std::size_t feature, std::size_t repeats, const Permuter& permute);
PermutationResult permutation_importance(const Scorer& model, const Matrix& inputs, std::span<const int> labels,
                                         std::size_t feature, std::size_t repeats, RandomStream& rng);

struct FeatureImportance {
    std::size_t feature = 0;
    double mean_drop = 0.0;
    double std_drop = 0.0;
    std::size_t rank = 0;  // 1 = most important
    bool constant_feature = false;
    bool unused = false;   // not read by the model; drop is 0 by construction
};

struct ImportanceReport {
    double baseline_auc = 0.0;
    std::size_t repeats = 0;
    std::vector<FeatureImportance> features;  // indexed by feature
};

/// Importance of every column of `inputs`. Columns outside `used` are not
/// permuted. Each feature gets its own random stream derived from `seed`.
ImportanceReport importance_report(const Scorer& model, const Matrix& inputs, std::span<const int> labels,
                                   std::span<const std::size_t> used, std::size_t repeats, std::uint64_t seed);

// --- multi-run aggregation --------------------------------------------------

struct FiveNumberSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

struct Histogram {
    double bin_width = 0.02;
    std::vector<double> lower_edges;
    std::vector<std::size_t> counts;
};

struct RunAggregate {
    std::vector<double> aucs;
    double auc_mean = 0.0;
    double auc_std = 0.0;  // population
    FiveNumberSummary auc_summary;
    std::vector<double> fpr_grid;
    std::vector<double> tpr_mean;
    std::vector<double> tpr_std;  // population
    Histogram histogram;
};

struct AggregateOptions {
    std::size_t grid_points = 101;
    double bin_width = 0.02;
};

RunAggregate aggregate_runs(std::span<const RocCurve> curves, std::span<const double> aucs,
                            const AggregateOptions& options = {});

/// Neumaier-compensated sum.
double stable_sum(std::span<const double> values);
double mean(std::span<const double> values);
/// Population standard deviation.
double population_std(std::span<const double> values);
/// Linear-interpolation quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);
FiveNumberSummary five_number_summary(std::span<const double> values);

}  // namespace gapnet
