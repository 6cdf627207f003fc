#include "gapnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gapnet/error.hpp"

namespace gapnet {
namespace {

void check_binary(std::span<const double> scores, std::span<const int> labels, std::size_t* pos, std::size_t* neg) {
    if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
    std::size_t p = 0, n = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            ++p;
        } else if (labels[i] == 0) {
            ++n;
        } else {
            throw ValidationError("labels must be 0 or 1");
        }
        if (std::isnan(scores[i])) throw ValidationError("NaN score at index " + std::to_string(i));
    }
    if (p == 0 || n == 0) throw ValidationError("AUC needs both classes present");
    *pos = p;
    *neg = n;
}

// 1-based midranks of `values`.
std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return stable_sum(sq) / static_cast<double>(v.size() - 1);
}

double sample_covariance(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2) return 0.0;
    const double ma = mean(a), mb = mean(b);
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
    return stable_sum(prod) / static_cast<double>(a.size() - 1);
}

}  // namespace

// --- summaries --------------------------------------------------------------

double stable_sum(std::span<const double> values) {
    double sum = 0.0, c = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    return sum + c;
}

double mean(std::span<const double> values) {
    if (values.empty()) throw ValidationError("mean of an empty sample");
    return stable_sum(values) / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
    const double m = mean(values);
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - m) * (values[i] - m);
    return std::sqrt(stable_sum(sq) / static_cast<double>(values.size()));
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

FiveNumberSummary five_number_summary(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    return {quantile(v, 0.0), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), quantile(v, 1.0)};
}

// --- AUC and ROC ------------------------------------------------------------

double auc(std::span<const double> scores, std::span<const int> labels) {
    std::size_t m = 0, n = 0;
    check_binary(scores, labels, &m, &n);
    const auto ranks = midranks(scores);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 1) rank_sum += ranks[i];
    const double md = static_cast<double>(m);
    return (rank_sum - md * (md + 1.0) / 2.0) / (md * static_cast<double>(n));
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
    std::size_t m = 0, n = 0;
    check_binary(scores, labels, &m, &n);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        curve.points.push_back(
            {threshold, static_cast<double>(fp) / static_cast<double>(n), static_cast<double>(tp) / static_cast<double>(m)});
    }
    return curve;
}

double RocCurve::area() const {
    double a = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        a += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
    return a;
}

double RocCurve::tpr_at(double fpr) const {
    if (points.empty()) throw ValidationError("empty ROC curve");
    std::size_t i = 0;
    while (i < points.size() && points[i].fpr <= fpr) ++i;
    if (i == 0) return points.front().tpr;
    const RocPoint& left = points[i - 1];
    if (i == points.size() || left.fpr == fpr) return left.tpr;
    const RocPoint& right = points[i];
    const double t = (fpr - left.fpr) / (right.fpr - left.fpr);
    return left.tpr + t * (right.tpr - left.tpr);
}

// --- confusion metrics ------------------------------------------------------

ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
    if (scores.empty()) throw ValidationError("confusion_at: empty input");
    if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
    ConfusionCounts c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i] == 1) {
            (predicted ? c.tp : c.fn) += 1;
        } else {
            (predicted ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

MetricReport metrics(const ConfusionCounts& c) {
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    return {ratio(c.tp, c.tp + c.fn), ratio(c.tn, c.tn + c.fp), ratio(c.tp + c.tn, c.total()), ratio(c.tp, c.tp + c.fp)};
}

// --- DeLong -----------------------------------------------------------------

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

StructuralComponents structural_components(std::span<const double> scores, std::span<const int> labels) {
    std::size_t m = 0, n = 0;
    check_binary(scores, labels, &m, &n);
    std::vector<double> pos, neg;
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            pos.push_back(scores[i]);
            pos_idx.push_back(i);
        } else {
            neg.push_back(scores[i]);
            neg_idx.push_back(i);
        }
    }
    const auto all = midranks(scores);
    const auto within_pos = midranks(pos);
    const auto within_neg = midranks(neg);
    StructuralComponents out;
    out.positive.resize(m);
    out.negative.resize(n);
    for (std::size_t i = 0; i < m; ++i)
        out.positive[i] = (all[pos_idx[i]] - within_pos[i]) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j)
        out.negative[j] = 1.0 - (all[neg_idx[j]] - within_neg[j]) / static_cast<double>(m);
    out.auc = auc(scores, labels);
    return out;
}

DelongResult delong_test(std::span<const double> scores_a, std::span<const double> scores_b,
                         std::span<const int> labels) {
    if (scores_a.size() != scores_b.size()) throw ValidationError("delong_test: score vectors differ in length");
    const auto a = structural_components(scores_a, labels);
    const auto b = structural_components(scores_b, labels);
    const std::size_t m = a.positive.size(), n = a.negative.size();
    if (m < 2 || n < 2) throw ValidationError("delong_test: needs at least two samples of each class");
    const double md = static_cast<double>(m), nd = static_cast<double>(n);

    DelongResult r;
    r.auc_a = a.auc;
    r.auc_b = b.auc;
    r.var_a = sample_variance(a.positive) / md + sample_variance(a.negative) / nd;
    r.var_b = sample_variance(b.positive) / md + sample_variance(b.negative) / nd;
    r.covariance = sample_covariance(a.positive, b.positive) / md + sample_covariance(a.negative, b.negative) / nd;

    // Variance of the difference from the differenced components: exactly 0 for identical inputs.
    std::vector<double> d10(m), d01(n);
    for (std::size_t i = 0; i < m; ++i) d10[i] = a.positive[i] - b.positive[i];
    for (std::size_t j = 0; j < n; ++j) d01[j] = a.negative[j] - b.negative[j];
    r.variance = sample_variance(d10) / md + sample_variance(d01) / nd;

    if (r.variance <= 0.0) {
        if (r.auc_a == r.auc_b) {
            r.z = 0.0;
            r.p = 1.0;
            return r;
        }
        throw TrainingError("delong_test: zero variance with unequal AUCs (degenerate input)");
    }
    r.z = (r.auc_a - r.auc_b) / std::sqrt(r.variance);
    r.p = std::erfc(std::abs(r.z) / std::sqrt(2.0));
    return r;
}

// --- permutation importance -------------------------------------------------

PermutationResult permutation_importance(const Scorer& model, const Matrix& inputs, std::span<const int> labels,
                                         std::size_t feature, std::size_t repeats, const Permuter& permute) {
    if (repeats < 1) throw ValidationError("permutation_importance: repeats must be >= 1");
    if (feature >= inputs.cols()) throw ValidationError("permutation_importance: feature out of range");
    if (inputs.rows() != labels.size()) throw ValidationError("permutation_importance: label count mismatch");
    PermutationResult result;
    bool constant = true;
    for (std::size_t i = 1; i < inputs.rows(); ++i)
        if (inputs(i, feature) != inputs(0, feature)) {
            constant = false;
            break;
        }
    if (constant) {
        result.constant_feature = true;
        return result;
    }
    const double baseline = auc(model(inputs), labels);
    std::vector<double> drops;
    drops.reserve(repeats);
    Matrix shuffled = inputs;
    std::vector<std::size_t> order(inputs.rows());
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        permute(order);
        for (std::size_t i = 0; i < inputs.rows(); ++i) shuffled(i, feature) = inputs(order[i], feature);
        drops.push_back(baseline - auc(model(shuffled), labels));
    }
    result.mean_drop = mean(drops);
    result.std_drop = population_std(drops);
    return result;
}

PermutationResult permutation_importance(const Scorer& model, const Matrix& inputs, std::span<const int> labels,
                                         std::size_t feature, std::size_t repeats, RandomStream& rng) {
    return permutation_importance(model, inputs, labels, feature, repeats,
                                  [&rng](std::vector<std::size_t>& order) { std::shuffle(order.begin(), order.end(), rng); });
}

ImportanceReport importance_report(const Scorer& model, const Matrix& inputs, std::span<const int> labels,
                                   std::span<const std::size_t> used, std::size_t repeats, std::uint64_t seed) {
    ImportanceReport report;
    report.repeats = repeats;
    report.baseline_auc = auc(model(inputs), labels);
    std::vector<bool> is_used(inputs.cols(), false);
    for (std::size_t f : used) {
        if (f >= inputs.cols()) throw ValidationError("importance_report: used feature out of range");
        is_used[f] = true;
    }
    report.features.resize(inputs.cols());
    for (std::size_t f = 0; f < inputs.cols(); ++f) {
        FeatureImportance& fi = report.features[f];
        fi.feature = f;
        if (!is_used[f]) {
            fi.unused = true;
            continue;
        }
        RandomStream rng = make_stream(seed, f);
        const auto r = permutation_importance(model, inputs, labels, f, repeats, rng);
        fi.mean_drop = r.mean_drop;
        fi.std_drop = r.std_drop;
        fi.constant_feature = r.constant_feature;
    }
    std::vector<std::size_t> order(inputs.cols());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.features[a].mean_drop > report.features[b].mean_drop;
    });
    for (std::size_t i = 0; i < order.size(); ++i) report.features[order[i]].rank = i + 1;
    return report;
}

// --- aggregation ------------------------------------------------------------

RunAggregate aggregate_runs(std::span<const RocCurve> curves, std::span<const double> aucs,
                            const AggregateOptions& options) {
    if (curves.size() != aucs.size()) throw ValidationError("aggregate_runs: curve and AUC counts differ");
    if (aucs.size() < 2) throw ValidationError("aggregate_runs: needs at least two runs");
    if (options.grid_points < 2) throw ValidationError("aggregate_runs: grid needs at least two points");
    if (!(options.bin_width > 0.0 && options.bin_width <= 1.0)) throw ValidationError("aggregate_runs: bad bin width");
    RunAggregate agg;
    agg.aucs.assign(aucs.begin(), aucs.end());
    agg.auc_mean = mean(aucs);
    agg.auc_std = population_std(aucs);
    agg.auc_summary = five_number_summary(aucs);

    const std::size_t g = options.grid_points;
    std::vector<double> column(curves.size());
    for (std::size_t k = 0; k < g; ++k) {
        const double fpr = static_cast<double>(k) / static_cast<double>(g - 1);
        for (std::size_t r = 0; r < curves.size(); ++r) column[r] = curves[r].tpr_at(fpr);
        agg.fpr_grid.push_back(fpr);
        agg.tpr_mean.push_back(mean(column));
        agg.tpr_std.push_back(population_std(column));
    }

    const auto bins = static_cast<std::size_t>(std::llround(1.0 / options.bin_width));
    agg.histogram.bin_width = options.bin_width;
    agg.histogram.counts.assign(bins, 0);
    for (std::size_t b = 0; b < bins; ++b) agg.histogram.lower_edges.push_back(static_cast<double>(b) * options.bin_width);
    for (double a : aucs) {
        auto b = static_cast<std::size_t>(std::floor(a / options.bin_width + 1e-9));
        agg.histogram.counts[std::min(b, bins - 1)] += 1;
    }
    return agg;
}

}  // namespace gapnet
