#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gapnet/adam.hpp"
#include "gapnet/clustering.hpp"
#include "gapnet/dataset.hpp"
#include "gapnet/network.hpp"

namespace gapnet {

struct TrainConfig {
    std::size_t epochs = 2000;
    AdamConfig adam;
    std::size_t batch_size = 0;  // 0 = full batch
    double dropout_rate = 0.5;
    std::size_t hidden_multiplier = 2;
    std::map<std::string, std::size_t> hidden_overrides;  // cluster name -> hidden width
    std::uint64_t seed = 0;
    bool freeze_bodies = true;

    void validate() const;
};

/// [F, m*F, m*F, 1]: two ReLU hidden layers, dropout after the second, sigmoid output.
MlpNetwork build_classifier(std::size_t inputs, std::size_t hidden_width, double dropout_rate, RandomStream& rng);
MlpNetwork build_vanilla(std::size_t features, std::size_t hidden_multiplier, double dropout_rate, RandomStream& rng);
MlpNetwork build_subnet(const FeatureCluster& cluster, std::size_t hidden_multiplier, double dropout_rate,
                        RandomStream& rng, std::optional<std::size_t> hidden_override = std::nullopt);

/// A classifier network bound to a subset of dataset columns.
struct MlpClassifier {
    std::string name;
    FeatureIndices features;
    MlpNetwork net;

    /// Inference scores for a full-width matrix (only `features` columns are read).
    std::vector<double> predict(const Matrix& full_width) const;
};

struct GapNetBody {
    std::string name;
    FeatureIndices features;
    MlpNetwork body;  // classifier without its output head

    friend bool operator==(const GapNetBody&, const GapNetBody&) = default;
};

struct GapNetGradients {
    std::vector<Gradients> bodies;
    LayerGradient fusion;

    ConstParameterRefs refs() const;
};

/// Stage-II model: sub-network bodies whose last hidden activations are
/// concatenated (in cluster order) and fed to one sigmoid fusion node.
class GapNetModel {
public:
    struct Cache {
        std::vector<ForwardCache> bodies;
        Matrix concat;
        Matrix pre;
        Matrix scores;
    };

    GapNetModel() = default;
    GapNetModel(std::vector<GapNetBody> bodies, DenseLayer fusion, bool freeze_bodies);

    const std::vector<GapNetBody>& bodies() const noexcept { return bodies_; }
    std::vector<GapNetBody>& bodies() noexcept { return bodies_; }
    const DenseLayer& fusion() const noexcept { return fusion_; }
    DenseLayer& fusion() noexcept { return fusion_; }
    bool freeze_bodies() const noexcept { return freeze_bodies_; }
    void set_freeze_bodies(bool freeze);

    std::size_t fusion_width() const noexcept;
    /// Union of all body features, ascending.
    FeatureIndices used_features() const;

    Cache forward(const Matrix& full_width, Mode mode, RandomStream* rng) const;
    std::vector<double> predict(const Matrix& full_width) const;
    GapNetGradients backprop(const Cache& cache, std::span<const int> labels) const;

    /// Bodies (in order) then fusion weights and bias.
    ParameterRefs parameters();
    ConstParameterRefs parameters() const;
    std::size_t parameter_count() const noexcept;

    friend bool operator==(const GapNetModel&, const GapNetModel&) = default;

private:
    std::vector<GapNetBody> bodies_;
    DenseLayer fusion_;
    bool freeze_bodies_ = true;
};

/// Full-batch or mini-batch Adam on mean BCE. Returns the per-epoch loss
/// (computed on the train-mode forward pass of each update).
std::vector<double> fit(MlpNetwork& net, const Matrix& inputs, std::span<const int> labels, const TrainConfig& cfg,
                        RandomStream& rng);
std::vector<double> fit(GapNetModel& model, const Matrix& full_width, std::span<const int> labels,
                        const TrainConfig& cfg, RandomStream& rng);

/// Rows each model family trains on for a given split.
RowIndices vanilla_training_rows(const GappedDataset& ds, const DataSplit& split);
RowIndices stage1_training_rows(const GappedDataset& ds, const FeatureCluster& cluster, const DataSplit& split);
RowIndices stage2_training_rows(const GappedDataset& ds, const DataSplit& split);

MlpClassifier train_vanilla(const GappedDataset& ds, const DataSplit& split, const TrainConfig& cfg);
std::vector<MlpClassifier> train_stage1(const GappedDataset& ds, const ClusterPlan& plan, const DataSplit& split,
                                        const TrainConfig& cfg);
GapNetModel fuse(const std::vector<MlpClassifier>& subnets, bool freeze_bodies, RandomStream& rng);
GapNetModel train_stage2(GapNetModel model, const GappedDataset& ds, const DataSplit& split,
                         const TrainConfig& cfg);

/// Scores for dataset rows; every row must be complete for the model's features.
std::vector<double> predict(const MlpClassifier& model, const GappedDataset& ds, std::span<const std::size_t> rows);
std::vector<double> predict(const GapNetModel& model, const GappedDataset& ds, std::span<const std::size_t> rows);

}  // namespace gapnet
