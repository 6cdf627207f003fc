#include "gapnet/model.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "gapnet/error.hpp"
#include "gapnet/kernels.hpp"

namespace gapnet {

void TrainConfig::validate() const {
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ValidationError("dropout rate must be in [0, 1)");
    if (hidden_multiplier < 1) throw ValidationError("hidden multiplier must be >= 1");
    for (const auto& [name, width] : hidden_overrides)
        if (width < 1) throw ValidationError("hidden width override for '" + name + "' must be >= 1");
    adam.validate();
}

// --- architectures ----------------------------------------------------------

MlpNetwork build_classifier(std::size_t inputs, std::size_t hidden_width, double dropout_rate, RandomStream& rng) {
    if (inputs < 1 || hidden_width < 1) throw ValidationError("network widths must be >= 1");
    MlpNetwork net(inputs);
    net.add_layer(make_dense(inputs, hidden_width, Activation::ReLU, rng));
    net.add_layer(make_dense(hidden_width, hidden_width, Activation::ReLU, rng));
    net.add_dropout({dropout_rate, 1});
    net.add_layer(make_dense(hidden_width, 1, Activation::Sigmoid, rng));
    return net;
}

MlpNetwork build_vanilla(std::size_t features, std::size_t hidden_multiplier, double dropout_rate, RandomStream& rng) {
    return build_classifier(features, hidden_multiplier * features, dropout_rate, rng);
}

MlpNetwork build_subnet(const FeatureCluster& cluster, std::size_t hidden_multiplier, double dropout_rate,
                        RandomStream& rng, std::optional<std::size_t> hidden_override) {
    if (cluster.features.empty()) throw ValidationError("cluster '" + cluster.name + "' is empty");
    const std::size_t width = hidden_override.value_or(hidden_multiplier * cluster.features.size());
    return build_classifier(cluster.features.size(), width, dropout_rate, rng);
}

std::vector<double> MlpClassifier::predict(const Matrix& full_width) const {
    const Matrix out = infer(net, full_width.select_columns(features));
    return {out.values().begin(), out.values().end()};
}

// --- GapNetModel ------------------------------------------------------------

ConstParameterRefs GapNetGradients::refs() const {
    ConstParameterRefs out;
    for (const auto& b : bodies) {
        auto r = b.refs();
        out.insert(out.end(), r.begin(), r.end());
    }
    out.emplace_back(fusion.weights.values());
    out.emplace_back(fusion.biases);
    return out;
}

GapNetModel::GapNetModel(std::vector<GapNetBody> bodies, DenseLayer fusion, bool freeze_bodies)
    : bodies_(std::move(bodies)), fusion_(std::move(fusion)), freeze_bodies_(freeze_bodies) {
    if (bodies_.empty()) throw ValidationError("GapNet needs at least one body");
    for (const auto& b : bodies_) {
        if (b.body.input_width() != b.features.size())
            throw ValidationError("body '" + b.name + "' input width does not match its feature count");
    }
    if (fusion_.fan_in() != fusion_width() || fusion_.fan_out() != 1 || fusion_.activation != Activation::Sigmoid)
        throw ValidationError("fusion layer must map the concatenated body outputs to one sigmoid node");
    set_freeze_bodies(freeze_bodies);
}

void GapNetModel::set_freeze_bodies(bool freeze) {
    freeze_bodies_ = freeze;
    for (auto& b : bodies_) b.body.set_trainable(!freeze);
}

std::size_t GapNetModel::fusion_width() const noexcept {
    std::size_t w = 0;
    for (const auto& b : bodies_) w += b.body.output_width();
    return w;
}

FeatureIndices GapNetModel::used_features() const {
    FeatureIndices out;
    for (const auto& b : bodies_) out.insert(out.end(), b.features.begin(), b.features.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

GapNetModel::Cache GapNetModel::forward(const Matrix& full_width, Mode mode, RandomStream* rng) const {
    Cache cache;
    std::vector<Matrix> outputs;
    for (const auto& b : bodies_) {
        cache.bodies.push_back(gapnet::forward(b.body, full_width.select_columns(b.features), mode, rng));
        outputs.push_back(cache.bodies.back().output);
    }
    cache.concat = hconcat(outputs);
    cache.pre = kernels::matmul(cache.concat, fusion_.weights);
    kernels::add_row_vector(cache.pre, fusion_.biases);
    cache.scores = Matrix(cache.pre.rows(), 1);
    for (std::size_t i = 0; i < cache.pre.rows(); ++i) cache.scores(i, 0) = sigmoid(cache.pre(i, 0));
    return cache;
}

std::vector<double> GapNetModel::predict(const Matrix& full_width) const {
    std::vector<Matrix> outputs;
    for (const auto& b : bodies_) outputs.push_back(infer(b.body, full_width.select_columns(b.features)));
    Matrix z = kernels::matmul(hconcat(outputs), fusion_.weights);
    kernels::add_row_vector(z, fusion_.biases);
    std::vector<double> scores(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) scores[i] = sigmoid(z(i, 0));
    return scores;
}

GapNetGradients GapNetModel::backprop(const Cache& cache, std::span<const int> labels) const {
    const std::size_t n = cache.scores.rows();
    if (labels.size() != n || n == 0) throw ValidationError("GapNet backprop: label count does not match batch");
    if (cache.bodies.size() != bodies_.size()) throw ValidationError("GapNet backprop: cache/body count mismatch");
    Matrix dz(n, 1);
    for (std::size_t i = 0; i < n; ++i) dz(i, 0) = (cache.scores(i, 0) - labels[i]) / static_cast<double>(n);

    GapNetGradients grads;
    grads.fusion.weights = kernels::matmul_tn(cache.concat, dz);
    grads.fusion.biases = kernels::column_sums(dz);

    if (freeze_bodies_) {
        for (const auto& b : bodies_) {
            Gradients g;
            for (const auto& l : b.body.layers())
                g.layers.push_back({Matrix(l.fan_in(), l.fan_out()), std::vector<double>(l.fan_out(), 0.0)});
            grads.bodies.push_back(std::move(g));
        }
        return grads;
    }
    const Matrix d_concat = kernels::matmul_nt(dz, fusion_.weights);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < bodies_.size(); ++k) {
        const std::size_t width = bodies_[k].body.output_width();
        Matrix d_out(n, width);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < width; ++j) d_out(i, j) = d_concat(i, offset + j);
        grads.bodies.push_back(backward(bodies_[k].body, cache.bodies[k], d_out));
        offset += width;
    }
    return grads;
}

ParameterRefs GapNetModel::parameters() {
    ParameterRefs out;
    for (auto& b : bodies_) {
        auto r = b.body.parameters();
        out.insert(out.end(), r.begin(), r.end());
    }
    out.emplace_back(fusion_.weights.values());
    out.emplace_back(fusion_.biases);
    return out;
}

ConstParameterRefs GapNetModel::parameters() const {
    ConstParameterRefs out;
    for (const auto& b : bodies_) {
        auto r = b.body.parameters();
        out.insert(out.end(), r.begin(), r.end());
    }
    out.emplace_back(fusion_.weights.values());
    out.emplace_back(fusion_.biases);
    return out;
}

std::size_t GapNetModel::parameter_count() const noexcept {
    std::size_t n = fusion_.parameter_count();
    for (const auto& b : bodies_) n += b.body.parameter_count();
    return n;
}

// --- training loops ---------------------------------------------------------

namespace {

// Row batches for one epoch: a single full batch, or shuffled mini-batches.
std::vector<RowIndices> epoch_batches(std::size_t n, std::size_t batch_size, RandomStream& rng) {
    RowIndices order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (batch_size == 0 || batch_size >= n) return {order};
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<RowIndices> out;
    for (std::size_t start = 0; start < n; start += batch_size)
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch_size)));
    return out;
}

bool dropout_only_on_last_layer(const MlpNetwork& net) {
    return std::all_of(net.dropouts().begin(), net.dropouts().end(),
                       [&](const DropoutSpec& d) { return d.after_layer + 1 == net.depth() || d.rate == 0.0; });
}

std::vector<int> pick(std::span<const int> labels, const RowIndices& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(labels[r]);
    return out;
}

}  // namespace

std::vector<double> fit(MlpNetwork& net, const Matrix& inputs, std::span<const int> labels, const TrainConfig& cfg,
                        RandomStream& rng) {
    cfg.validate();
    if (inputs.rows() == 0) throw TrainingError("no training rows");
    if (labels.size() != inputs.rows()) throw ValidationError("fit: label count does not match inputs");
    AdamState adam(net.parameter_count(), cfg.adam);
    std::vector<double> losses;
    losses.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (const auto& batch : epoch_batches(inputs.rows(), cfg.batch_size, rng)) {
            const bool full = batch.size() == inputs.rows();
            const Matrix x = full ? inputs : inputs.select_rows(batch);
            const std::vector<int> y = full ? std::vector<int>(labels.begin(), labels.end()) : pick(labels, batch);
            const ForwardCache cache = forward(net, x, Mode::Train, &rng);
            epoch_loss += bce_loss(cache.output.values(), y) * static_cast<double>(batch.size());
            const Gradients grads = backprop(net, cache, y);
            const auto params = net.parameters();
            const auto g = grads.refs();
            adam.step(params, g);
        }
        losses.push_back(epoch_loss / static_cast<double>(inputs.rows()));
    }
    return losses;
}

std::vector<double> fit(GapNetModel& model, const Matrix& full_width, std::span<const int> labels,
                        const TrainConfig& cfg, RandomStream& rng) {
    cfg.validate();
    if (full_width.rows() == 0) throw TrainingError("no complete training rows for stage II");
    if (labels.size() != full_width.rows()) throw ValidationError("fit: label count does not match inputs");
    std::vector<double> losses;
    losses.reserve(cfg.epochs);

    const bool fast = model.freeze_bodies() &&
                      std::all_of(model.bodies().begin(), model.bodies().end(),
                                  [](const GapNetBody& b) { return dropout_only_on_last_layer(b.body); });
    if (!fast) {
        AdamState adam(model.parameter_count(), cfg.adam);
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            double epoch_loss = 0.0;
            for (const auto& batch : epoch_batches(full_width.rows(), cfg.batch_size, rng)) {
                const bool full = batch.size() == full_width.rows();
                const Matrix x = full ? full_width : full_width.select_rows(batch);
                const std::vector<int> y =
                    full ? std::vector<int>(labels.begin(), labels.end()) : pick(labels, batch);
                const auto cache = model.forward(x, Mode::Train, &rng);
                epoch_loss += bce_loss(cache.scores.values(), y) * static_cast<double>(batch.size());
                const auto grads = model.backprop(cache, y);
                const auto params = model.parameters();
                const auto g = grads.refs();
                adam.step(params, g);
            }
            losses.push_back(epoch_loss / static_cast<double>(full_width.rows()));
        }
        return losses;
    }

    // Frozen bodies whose only dropout follows their last layer: the
    // pre-dropout body outputs never change, so compute them once and redraw
    // only the dropout masks each step. Draw order matches the general path.
    std::vector<Matrix> body_out;
    std::vector<double> rates;
    for (const auto& b : model.bodies()) {
        body_out.push_back(infer(b.body, full_width.select_columns(b.features)));
        rates.push_back(b.body.dropout_after(b.body.depth() - 1).value_or(0.0));
    }
    DenseLayer& fusion = model.fusion();
    AdamState adam(fusion.parameter_count(), cfg.adam);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (const auto& batch : epoch_batches(full_width.rows(), cfg.batch_size, rng)) {
            const bool full = batch.size() == full_width.rows();
            const std::vector<int> y = full ? std::vector<int>(labels.begin(), labels.end()) : pick(labels, batch);
            std::vector<Matrix> parts;
            for (std::size_t k = 0; k < body_out.size(); ++k) {
                Matrix a = full ? body_out[k] : body_out[k].select_rows(batch);
                if (rates[k] > 0.0) {
                    const double scale = 1.0 / (1.0 - rates[k]);
                    std::bernoulli_distribution keep(1.0 - rates[k]);
                    for (double& v : a.values()) v *= keep(rng) ? scale : 0.0;
                }
                parts.push_back(std::move(a));
            }
            const Matrix concat = hconcat(parts);
            Matrix z = kernels::matmul(concat, fusion.weights);
            kernels::add_row_vector(z, fusion.biases);
            const std::size_t n = z.rows();
            std::vector<double> s(n);
            Matrix dz(n, 1);
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = sigmoid(z(i, 0));
                dz(i, 0) = (s[i] - y[i]) / static_cast<double>(n);
            }
            epoch_loss += bce_loss(s, y) * static_cast<double>(n);
            const Matrix dw = kernels::matmul_tn(concat, dz);
            const std::vector<double> db = kernels::column_sums(dz);
            const std::vector<std::span<double>> params{fusion.weights.values(), fusion.biases};
            const std::vector<std::span<const double>> grads{dw.values(), db};
            adam.step(params, grads);
        }
        losses.push_back(epoch_loss / static_cast<double>(full_width.rows()));
    }
    return losses;
}

// --- stages -----------------------------------------------------------------

RowIndices vanilla_training_rows(const GappedDataset& ds, const DataSplit& split) {
    return without(complete_rows(ds), split.test_rows);
}

RowIndices stage1_training_rows(const GappedDataset& ds, const FeatureCluster& cluster, const DataSplit& split) {
    return without(complete_rows_for(ds, cluster.features), split.test_rows);
}

RowIndices stage2_training_rows(const GappedDataset& ds, const DataSplit& split) {
    return vanilla_training_rows(ds, split);
}

MlpClassifier train_vanilla(const GappedDataset& ds, const DataSplit& split, const TrainConfig& cfg) {
    cfg.validate();
    const RowIndices rows = vanilla_training_rows(ds, split);
    if (rows.empty()) throw TrainingError("vanilla: no complete training rows");
    FeatureIndices all(ds.features());
    std::iota(all.begin(), all.end(), std::size_t{0});
    RandomStream rng = make_stream(cfg.seed, 1);
    MlpClassifier model{"vanilla", all, build_vanilla(ds.features(), cfg.hidden_multiplier, cfg.dropout_rate, rng)};
    fit(model.net, gather(ds, rows, all), labels_for(ds, rows), cfg, rng);
    return model;
}

std::vector<MlpClassifier> train_stage1(const GappedDataset& ds, const ClusterPlan& plan, const DataSplit& split,
                                        const TrainConfig& cfg) {
    cfg.validate();
    if (plan.clusters.empty()) throw ValidationError("stage I: plan has no clusters");
    std::vector<MlpClassifier> out;
    for (std::size_t k = 0; k < plan.clusters.size(); ++k) {
        const FeatureCluster& cluster = plan.clusters[k];
        const RowIndices rows = stage1_training_rows(ds, cluster, split);
        if (rows.empty()) throw TrainingError("stage I: cluster '" + cluster.name + "' has no training rows");
        RandomStream rng = make_stream(cfg.seed, 100 + k);
        std::optional<std::size_t> width;
        if (const auto it = cfg.hidden_overrides.find(cluster.name); it != cfg.hidden_overrides.end())
            width = it->second;
        MlpClassifier sub{cluster.name, cluster.features,
                          build_subnet(cluster, cfg.hidden_multiplier, cfg.dropout_rate, rng, width)};
        fit(sub.net, gather(ds, rows, cluster.features), labels_for(ds, rows), cfg, rng);
        out.push_back(std::move(sub));
    }
    return out;
}

GapNetModel fuse(const std::vector<MlpClassifier>& subnets, bool freeze_bodies, RandomStream& rng) {
    if (subnets.empty()) throw ValidationError("fuse: no sub-networks");
    std::vector<GapNetBody> bodies;
    std::size_t width = 0;
    for (const auto& s : subnets) {
        if (!s.net.is_classifier()) throw ValidationError("fuse: '" + s.name + "' is not a classifier network");
        bodies.push_back({s.name, s.features, s.net.without_head()});
        width += bodies.back().body.output_width();
    }
    return GapNetModel(std::move(bodies), make_dense(width, 1, Activation::Sigmoid, rng), freeze_bodies);
}

GapNetModel train_stage2(GapNetModel model, const GappedDataset& ds, const DataSplit& split,
                         const TrainConfig& cfg) {
    cfg.validate();
    const RowIndices rows = stage2_training_rows(ds, split);
    if (rows.empty()) throw TrainingError("stage II: no complete training rows");
    RandomStream rng = make_stream(cfg.seed, 3);
    fit(model, gather_full_width(ds, rows, model.used_features()), labels_for(ds, rows), cfg, rng);
    return model;
}

std::vector<double> predict(const MlpClassifier& model, const GappedDataset& ds, std::span<const std::size_t> rows) {
    return model.predict(gather_full_width(ds, rows, model.features));
}

std::vector<double> predict(const GapNetModel& model, const GappedDataset& ds, std::span<const std::size_t> rows) {
    return model.predict(gather_full_width(ds, rows, model.used_features()));
}

}  // namespace gapnet
