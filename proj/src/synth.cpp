#include "gapnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "gapnet/error.hpp"
#include "gapnet/kernels.hpp"
#include "gapnet/random.hpp"

namespace gapnet {
namespace {

FeatureIndices to_zero_based(const std::vector<std::size_t>& one_based) {
    FeatureIndices out;
    for (std::size_t i : one_based) out.push_back(i - 1);
    return out;
}

}  // namespace

const std::vector<std::size_t>& paper_informative() {
    static const std::vector<std::size_t> v{1,  3,  4,  5,  8,  10, 11, 13, 14, 15, 18, 20, 22,
                                            25, 26, 27, 28, 29, 31, 33, 34, 35, 36, 39, 40};
    return v;
}

const std::vector<std::size_t>& paper_redundant() {
    static const std::vector<std::size_t> v{2, 6, 7, 9, 12, 17, 19, 24, 30, 37};
    return v;
}

const std::vector<std::size_t>& paper_noise() {
    static const std::vector<std::size_t> v{16, 21, 23, 32, 38};
    return v;
}

MadelonConfig MadelonConfig::paper(std::uint64_t seed) {
    MadelonConfig cfg;
    cfg.informative = to_zero_based(paper_informative());
    cfg.redundant = to_zero_based(paper_redundant());
    cfg.noise = to_zero_based(paper_noise());
    cfg.seed = seed;
    return cfg;
}

void MadelonConfig::validate() const {
    if (n_samples < 2) throw ValidationError("madelon: need at least 2 samples");
    if (informative.empty()) throw ValidationError("madelon: need at least one informative feature");
    if (!(class_separation > 0.0)) throw ValidationError("madelon: class separation must be > 0");
    if (clusters_per_class < 1) throw ValidationError("madelon: clusters per class must be >= 1");
    if (informative.size() + redundant.size() + noise.size() != n_features)
        throw ValidationError("madelon: informative + redundant + noise counts must equal n_features");
    std::set<std::size_t> seen;
    for (const auto* set : {&informative, &redundant, &noise})
        for (std::size_t f : *set) {
            if (f >= n_features) throw ValidationError("madelon: feature index " + std::to_string(f + 1) + " out of range");
            if (!seen.insert(f).second)
                throw ValidationError("madelon: feature " + std::to_string(f + 1) + " appears in two index sets");
        }
    const std::size_t clusters = 2 * clusters_per_class;
    if (informative.size() < 63 && (std::size_t{1} << informative.size()) < clusters)
        throw ValidationError("madelon: too few informative features for the requested clusters");
}

GappedDataset generate_madelon(const MadelonConfig& cfg) {
    cfg.validate();
    RandomStream rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const std::size_t n = cfg.n_samples;
    const std::size_t n_inf = cfg.informative.size();
    const std::size_t n_clusters = 2 * cfg.clusters_per_class;

    // Distinct hypercube vertices with coordinates +-class_separation.
    std::set<std::vector<bool>> used;
    std::vector<std::vector<double>> centroids;
    std::bernoulli_distribution coin(0.5);
    while (centroids.size() < n_clusters) {
        std::vector<bool> bits(n_inf);
        for (std::size_t j = 0; j < n_inf; ++j) bits[j] = coin(rng);
        if (!used.insert(bits).second) continue;
        std::vector<double> c(n_inf);
        for (std::size_t j = 0; j < n_inf; ++j) c[j] = bits[j] ? cfg.class_separation : -cfg.class_separation;
        centroids.push_back(std::move(c));
    }

    // Cluster k belongs to class k % 2; the remainder goes to the first clusters.
    std::vector<std::size_t> sizes(n_clusters, n / n_clusters);
    for (std::size_t k = 0; k < n % n_clusters; ++k) ++sizes[k];

    Matrix informative(n, n_inf);
    std::vector<int> labels(n);
    std::size_t row = 0;
    for (std::size_t k = 0; k < n_clusters; ++k) {
        Matrix z(sizes[k], n_inf);
        for (double& v : z.values()) v = normal(rng);
        Matrix mixing(n_inf, n_inf);
        for (double& v : mixing.values()) v = unit(rng);
        const Matrix x = kernels::matmul(z, mixing);
        for (std::size_t i = 0; i < sizes[k]; ++i, ++row) {
            for (std::size_t j = 0; j < n_inf; ++j) informative(row, j) = x(i, j) + centroids[k][j];
            labels[row] = static_cast<int>(k % 2);
        }
    }

    Matrix coeffs(n_inf, cfg.redundant.size());
    for (double& v : coeffs.values()) v = unit(rng);
    Matrix redundant = kernels::matmul(informative, coeffs);
    for (std::size_t j = 0; j < redundant.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += redundant(i, j);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (redundant(i, j) - mean) * (redundant(i, j) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) redundant(i, j) = (redundant(i, j) - mean) / (sd > 0.0 ? sd : 1.0);
    }

    Matrix noise(n, cfg.noise.size());
    for (double& v : noise.values()) v = normal(rng);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    Matrix values(n, cfg.n_features);
    std::vector<int> shuffled_labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = order[i];
        for (std::size_t j = 0; j < n_inf; ++j) values(i, cfg.informative[j]) = informative(src, j);
        for (std::size_t j = 0; j < cfg.redundant.size(); ++j) values(i, cfg.redundant[j]) = redundant(src, j);
        for (std::size_t j = 0; j < cfg.noise.size(); ++j) values(i, cfg.noise[j]) = noise(src, j);
        shuffled_labels[i] = labels[src];
    }

    std::vector<std::string> names;
    for (std::size_t f = 0; f < cfg.n_features; ++f) names.push_back("x" + std::to_string(f + 1));
    return GappedDataset::from_complete(std::move(names), values, std::move(shuffled_labels));
}

GapPattern GapPattern::paper() { return GapPattern{{{0, 450, 0, 25}, {550, 1000, 25, 40}}}; }

GappedDataset inject_gaps(const GappedDataset& ds, const GapPattern& pattern) {
    if (ds.missing_count() != 0) throw ValidationError("inject_gaps: dataset already has missing cells");
    for (const auto& b : pattern.blocks) {
        if (b.row_begin > b.row_end || b.row_end > ds.rows() || b.feature_begin > b.feature_end ||
            b.feature_end > ds.features()) {
            throw ValidationError("inject_gaps: block rows [" + std::to_string(b.row_begin) + ", " +
                                  std::to_string(b.row_end) + ") x features [" + std::to_string(b.feature_begin) +
                                  ", " + std::to_string(b.feature_end) + ") is out of range for " +
                                  std::to_string(ds.rows()) + "x" + std::to_string(ds.features()));
        }
    }
    GappedDataset out = ds;
    for (const auto& b : pattern.blocks)
        for (std::size_t r = b.row_begin; r < b.row_end; ++r)
            for (std::size_t f = b.feature_begin; f < b.feature_end; ++f) out.mark_missing(r, f);
    return out;
}

}  // namespace gapnet
