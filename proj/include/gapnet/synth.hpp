#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gapnet/dataset.hpp"

namespace gapnet {

/// Madelon-style generator settings. Index sets are 0-based column positions.
struct MadelonConfig {
    std::size_t n_samples = 1000;
    std::size_t n_features = 40;
    FeatureIndices informative;
    FeatureIndices redundant;
    FeatureIndices noise;
    double class_separation = 0.3;
    std::size_t clusters_per_class = 2;
    std::uint64_t seed = 0;

    void validate() const;

    /// 1000 x 40 with the 25 informative / 10 redundant / 5 noise columns at
    /// x1, x3, ... (see paper_informative() etc.).
    static MadelonConfig paper(std::uint64_t seed = 0);
};

/// 1-based feature numbers of the reference simulated dataset.
const std::vector<std::size_t>& paper_informative();
const std::vector<std::size_t>& paper_redundant();
const std::vector<std::size_t>& paper_noise();

/// Complete dataset: Gaussian clusters around hypercube vertices (informative
/// block), random linear combinations of it (redundant), and independent
/// standard normals (noise). Rows are shuffled; columns are named x1..xF.
GappedDataset generate_madelon(const MadelonConfig& cfg);

/// Half-open 0-based block of cells to remove.
struct GapBlock {
    std::size_t row_begin = 0;
    std::size_t row_end = 0;
    std::size_t feature_begin = 0;
    std::size_t feature_end = 0;
};

struct GapPattern {
    std::vector<GapBlock> blocks;

    /// Rows 1-450 lose x1..x25 and rows 551-1000 lose x26..x40.
    static GapPattern paper();
};

GappedDataset inject_gaps(const GappedDataset& ds, const GapPattern& pattern);

}  // namespace gapnet
