#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "gapnet/clustering.hpp"
#include "gapnet/experiment.hpp"
#include "gapnet/metrics.hpp"
#include "gapnet/serialize.hpp"

namespace gapnet {

/// 64-bit FNV-1a, printed as 16 hex digits. Used for config and file hashes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
std::string file_hash(const std::filesystem::path& path);

Json to_json(const TrainConfig& cfg);
Json to_json(const ExperimentConfig& cfg);
Json to_json(const MetricReport& m);
Json to_json(const ConfusionCounts& c);
Json to_json(const DelongResult& d);
Json to_json(const RunAggregate& a);
Json to_json(const CoverageReport& report, const ClusterPlan& plan, const GappedDataset& ds);
Json to_json(const ImportanceReport& report, const std::vector<std::string>& feature_names, std::size_t top_k);
Json to_json(const BenchmarkReport& report);

/// Mean and std TPR per model on the common FPR grid.
std::string roc_csv(const BenchmarkReport& report);
/// AUC histogram counts per model.
std::string histogram_csv(const BenchmarkReport& report);
/// One row per run: seed and AUC of every model.
std::string run_auc_csv(const BenchmarkReport& report);
/// ROC points of a single scored test set.
std::string curve_csv(const RocCurve& curve);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gapnet
