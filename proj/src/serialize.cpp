#include "gapnet/serialize.hpp"

#include <fstream>

#include "gapnet/error.hpp"

namespace gapnet {
namespace {

constexpr const char* kFormat = "gapnet-model";
constexpr int kFormatVersion = 1;

Json layer_to_json(const DenseLayer& l) {
    return Json{{"fan_in", l.fan_in()},
                {"fan_out", l.fan_out()},
                {"activation", std::string(to_string(l.activation))},
                {"trainable", l.trainable},
                {"weights", std::vector<double>(l.weights.values().begin(), l.weights.values().end())},
                {"biases", l.biases}};
}

DenseLayer layer_from_json(const Json& j) {
    const auto fan_in = j.at("fan_in").get<std::size_t>();
    const auto fan_out = j.at("fan_out").get<std::size_t>();
    DenseLayer l;
    l.weights = Matrix(fan_in, fan_out, j.at("weights").get<std::vector<double>>());
    l.biases = j.at("biases").get<std::vector<double>>();
    l.activation = activation_from_string(j.at("activation").get<std::string>());
    l.trainable = j.value("trainable", true);
    if (l.biases.size() != fan_out) throw ValidationError("model file: bias length does not match fan_out");
    return l;
}

template <typename Fn>
auto parse_guard(Fn fn) {
    try {
        return fn();
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("model file: ") + e.what());
    }
}

}  // namespace

Json to_json(const MlpNetwork& net) {
    Json layers = Json::array();
    for (const auto& l : net.layers()) layers.push_back(layer_to_json(l));
    Json dropouts = Json::array();
    for (const auto& d : net.dropouts()) dropouts.push_back({{"rate", d.rate}, {"after_layer", d.after_layer}});
    return Json{{"input_width", net.input_width()}, {"layers", layers}, {"dropouts", dropouts}};
}

MlpNetwork network_from_json(const Json& j) {
    return parse_guard([&] {
        MlpNetwork net(j.at("input_width").get<std::size_t>());
        for (const auto& l : j.at("layers")) net.add_layer(layer_from_json(l));
        for (const auto& d : j.at("dropouts"))
            net.add_dropout({d.at("rate").get<double>(), d.at("after_layer").get<std::size_t>()});
        return net;
    });
}

Json to_json(const ModelFile& file) {
    Json j{{"format", kFormat}, {"version", kFormatVersion}, {"library_version", GAPNET_VERSION},
           {"feature_names", file.feature_names}};
    if (file.normalization) {
        j["normalization"] = {{"mean", file.normalization->mean}, {"stddev", file.normalization->stddev}};
    } else {
        j["normalization"] = nullptr;
    }
    if (const auto* mlp = std::get_if<MlpClassifier>(&file.model)) {
        j["kind"] = "mlp";
        j["name"] = mlp->name;
        j["features"] = mlp->features;
        j["network"] = to_json(mlp->net);
    } else {
        const auto& g = std::get<GapNetModel>(file.model);
        j["kind"] = "gapnet";
        j["freeze_bodies"] = g.freeze_bodies();
        Json bodies = Json::array();
        for (const auto& b : g.bodies())
            bodies.push_back({{"cluster", b.name}, {"features", b.features}, {"network", to_json(b.body)}});
        j["bodies"] = bodies;
        j["fusion"] = layer_to_json(g.fusion());
    }
    return j;
}

ModelFile model_from_json(const Json& j) {
    return parse_guard([&] {
        if (j.at("format").get<std::string>() != kFormat) throw ValidationError("not a gapnet model file");
        if (j.at("version").get<int>() != kFormatVersion) throw ValidationError("unsupported model file version");
        ModelFile file;
        file.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        if (!j.at("normalization").is_null()) {
            file.normalization = NormalizationStats{j["normalization"].at("mean").get<std::vector<double>>(),
                                                    j["normalization"].at("stddev").get<std::vector<double>>()};
        }
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "mlp") {
            file.model = MlpClassifier{j.at("name").get<std::string>(), j.at("features").get<FeatureIndices>(),
                                       network_from_json(j.at("network"))};
        } else if (kind == "gapnet") {
            std::vector<GapNetBody> bodies;
            for (const auto& b : j.at("bodies")) {
                bodies.push_back({b.at("cluster").get<std::string>(), b.at("features").get<FeatureIndices>(),
                                  network_from_json(b.at("network"))});
            }
            file.model = GapNetModel(std::move(bodies), layer_from_json(j.at("fusion")),
                                     j.at("freeze_bodies").get<bool>());
        } else {
            throw ValidationError("unknown model kind '" + kind + "'");
        }
        for (std::size_t f : file.used_features())
            if (f >= file.feature_names.size()) throw ValidationError("model file: feature index out of range");
        return file;
    });
}

FeatureIndices ModelFile::used_features() const {
    if (const auto* mlp = std::get_if<MlpClassifier>(&model)) return mlp->features;
    return std::get<GapNetModel>(model).used_features();
}

GappedDataset ModelFile::prepare(const GappedDataset& raw) const {
    if (raw.feature_names() != feature_names)
        throw ValidationError("dataset header does not match the features the model was trained on");
    return normalization ? normalize(raw, *normalization) : raw;
}

std::vector<double> ModelFile::predict(const GappedDataset& raw, std::span<const std::size_t> rows) const {
    const GappedDataset ds = prepare(raw);
    return std::visit([&](const auto& m) { return gapnet::predict(m, ds, rows); }, model);
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << to_json(file).dump(1) << '\n';
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("model file: ") + e.what());
    }
    return model_from_json(j);
}

}  // namespace gapnet
