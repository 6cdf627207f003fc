#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "gapnet/dataset.hpp"

namespace gapnet {

struct FeatureCluster {
    std::string name;
    FeatureIndices features;  // ascending, unique

    friend bool operator==(const FeatureCluster&, const FeatureCluster&) = default;
};

struct ClusterPlan {
    std::vector<FeatureCluster> clusters;
    std::vector<std::size_t> complete_counts;  // rows complete for each cluster
    FeatureIndices uncovered;                  // features in no cluster
};

/// Builds a plan from explicit clusters, attaching counts and the uncovered set.
/// Does not reject overlaps; see validate_plan.
ClusterPlan make_plan(const GappedDataset& ds, std::vector<FeatureCluster> clusters);

/// One cluster per distinct presence signature (the column of the mask).
/// Features that are never present are reported as uncovered.
ClusterPlan signature_clusters(const GappedDataset& ds);

/// Greedily merges the pair whose union keeps the most complete rows while
/// that count stays >= min_support. Clusters already below min_support move to
/// the uncovered set; if every cluster is below it, throws.
ClusterPlan merge_clusters(const ClusterPlan& plan, const GappedDataset& ds, std::size_t min_support);

struct FeatureOverlap {
    std::size_t feature;
    std::vector<std::string> clusters;
};

struct CoverageReport {
    std::vector<FeatureOverlap> overlaps;
    std::vector<std::string> empty_clusters;   // no features
    std::vector<std::string> empty_support;    // zero complete rows
    FeatureIndices uncovered;
    std::vector<std::size_t> complete_counts;
    std::vector<std::size_t> train_counts;     // only filled when a split is given

    bool valid() const noexcept { return overlaps.empty() && empty_clusters.empty() && empty_support.empty(); }
};

CoverageReport validate_plan(const ClusterPlan& plan, const GappedDataset& ds, const DataSplit* split = nullptr);

/// Plan text: one `name = feature, feature, ...` line per cluster; `#` starts a comment.
ClusterPlan parse_plan(const std::string& text, const GappedDataset& ds);
ClusterPlan load_plan(const std::filesystem::path& path, const GappedDataset& ds);
std::string format_plan(const ClusterPlan& plan, const GappedDataset& ds);

/// "A", "B", ..., "Z", "AA", ...
std::string cluster_label(std::size_t index);

}  // namespace gapnet
