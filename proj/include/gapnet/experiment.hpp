#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gapnet/clustering.hpp"
#include "gapnet/dataset.hpp"
#include "gapnet/metrics.hpp"
#include "gapnet/model.hpp"

namespace gapnet {

struct ExperimentConfig {
    TrainConfig train;
    double test_fraction = 0.2;
    bool stratified = true;
    bool normalize = true;
    bool train_vanilla = true;
    bool train_gapnet = true;
    /// Also fuse a second GapNet with the opposite freeze setting.
    bool both_freeze_modes = true;
    std::uint64_t seed = 0;
    std::size_t runs = 100;
    int jobs = 1;
    AggregateOptions aggregate;

    void validate() const;
};

/// Seed of run `index`: base seed XOR run index, so it does not depend on --jobs.
constexpr std::uint64_t run_seed(std::uint64_t base, std::size_t index) noexcept { return base ^ index; }

struct ModelScores {
    std::string name;
    std::vector<double> scores;  // one per test row
};

struct RunResult {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    RowIndices test_rows;
    std::vector<int> test_labels;
    std::vector<ModelScores> models;
    std::size_t vanilla_train_rows = 0;
    std::size_t stage2_train_rows = 0;
    std::vector<std::size_t> stage1_train_rows;
    bool exclusion_ok = true;      // no test row in any training set
    bool bodies_unchanged = true;  // frozen bodies bit-identical across stage II

    const ModelScores* find(const std::string& name) const;
};

/// Everything trained in one run.
struct TrainedRun {
    RunResult result;
    DataSplit split;
    std::optional<NormalizationStats> stats;
    std::optional<MlpClassifier> vanilla;
    std::vector<MlpClassifier> subnets;
    std::optional<GapNetModel> gapnet;      // freeze setting from the config
    std::optional<GapNetModel> gapnet_alt;  // opposite freeze setting
};

/// Model names used in reports.
inline constexpr const char* kGapNet = "gapnet";
inline constexpr const char* kGapNetFrozen = "gapnet_frozen";
inline constexpr const char* kGapNetFinetuned = "gapnet_finetuned";
inline constexpr const char* kVanilla = "vanilla";
std::string cluster_model_name(const std::string& cluster);

/// One split + train + score cycle. `ds` is the raw dataset; normalization
/// statistics come from the split's training rows.
TrainedRun run_once(const GappedDataset& ds, const ClusterPlan& plan, const ExperimentConfig& cfg,
                    std::size_t run_index);

struct MetricSummary {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::size_t runs_defined[4] = {0, 0, 0, 0};
    ConfusionCounts pooled;
};

struct ModelSummary {
    std::string name;
    RunAggregate aggregate;
    MetricSummary metrics;
};

struct BenchmarkReport {
    ExperimentConfig config;
    std::vector<RunResult> runs;
    std::vector<ModelSummary> models;  // gapnet variants, vanilla, then clusters by descending median AUC
    std::vector<std::string> median_ranking;
    std::optional<DelongResult> pooled_delong;  // gapnet vs vanilla, all runs' test sets concatenated
    std::vector<std::optional<DelongResult>> per_run_delong;
    bool freeze_contract_held = true;
    bool exclusion_held = true;

    const ModelSummary* find(const std::string& name) const;
};

/// Repeated resampling benchmark. Runs execute on up to cfg.jobs OpenMP
/// threads; results are identical for any job count. A failing run aborts the
/// benchmark with a TrainingError naming its seed.
BenchmarkReport run_benchmark(const GappedDataset& ds, const ClusterPlan& plan, const ExperimentConfig& cfg);

/// Summaries across runs (exposed for tests).
BenchmarkReport summarize(const ExperimentConfig& cfg, std::vector<RunResult> runs);

}  // namespace gapnet
