#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gapnet/dataset.hpp"
#include "gapnet/model.hpp"

namespace gapnet {

using Json = nlohmann::ordered_json;

/// A trained model plus what is needed to score raw dataset rows.
struct ModelFile {
    std::vector<std::string> feature_names;
    std::optional<NormalizationStats> normalization;
    std::variant<MlpClassifier, GapNetModel> model;

    FeatureIndices used_features() const;
    /// Scores raw (unnormalized) rows of a dataset with the same header.
    std::vector<double> predict(const GappedDataset& raw, std::span<const std::size_t> rows) const;
    /// Applies the stored normalization (or returns a copy when there is none).
    GappedDataset prepare(const GappedDataset& raw) const;
};

Json to_json(const MlpNetwork& net);
MlpNetwork network_from_json(const Json& j);

Json to_json(const ModelFile& file);
ModelFile model_from_json(const Json& j);

/// Doubles are written in shortest round-trip form, so a load reproduces
/// predictions bit for bit.
void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace gapnet
