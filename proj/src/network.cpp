#include "gapnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gapnet/error.hpp"
#include "gapnet/kernels.hpp"

namespace gapnet {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Identity: return "identity";
    }
    return "identity";
}

Activation activation_from_string(std::string_view name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "identity") return Activation::Identity;
    throw ValidationError("unknown activation '" + std::string(name) + "'");
}

double sigmoid(double x) noexcept {
    // Kept strictly inside (0, 1) so scores never saturate to a class label.
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    double s;
    if (x >= 0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        s = e / (1.0 + e);
    }
    return std::clamp(s, lo, hi);
}

double relu(double x) noexcept { return x > 0.0 ? x : 0.0; }

Matrix glorot_init(std::size_t fan_in, std::size_t fan_out, RandomStream& rng) {
    if (fan_in == 0 || fan_out == 0) throw ValidationError("glorot_init: fan_in and fan_out must be >= 1");
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(fan_in, fan_out);
    for (double& v : w.values()) v = dist(rng);
    return w;
}

DenseLayer make_dense(std::size_t fan_in, std::size_t fan_out, Activation activation, RandomStream& rng) {
    return DenseLayer{glorot_init(fan_in, fan_out, rng), std::vector<double>(fan_out, 0.0), activation, true};
}

// --- MlpNetwork -------------------------------------------------------------

void MlpNetwork::add_layer(DenseLayer layer) {
    const std::size_t expected = layers_.empty() ? input_width_ : layers_.back().fan_out();
    if (layer.fan_in() != expected) {
        throw ValidationError("layer fan_in " + std::to_string(layer.fan_in()) + " does not chain: expected " +
                              std::to_string(expected));
    }
    if (layer.biases.size() != layer.fan_out()) throw ValidationError("layer bias length does not match fan_out");
    layers_.push_back(std::move(layer));
}

void MlpNetwork::add_dropout(DropoutSpec spec) {
    if (!(spec.rate >= 0.0 && spec.rate < 1.0)) throw ValidationError("dropout rate must be in [0, 1)");
    if (spec.after_layer >= layers_.size()) throw ValidationError("dropout placed after a missing layer");
    if (dropout_after(spec.after_layer)) throw ValidationError("layer already has a dropout");
    dropouts_.push_back(spec);
}

std::size_t MlpNetwork::output_width() const noexcept {
    return layers_.empty() ? input_width_ : layers_.back().fan_out();
}

std::optional<double> MlpNetwork::dropout_after(std::size_t layer) const noexcept {
    for (const auto& d : dropouts_)
        if (d.after_layer == layer) return d.rate;
    return std::nullopt;
}

bool MlpNetwork::is_classifier() const noexcept {
    return !layers_.empty() && layers_.back().fan_out() == 1 && layers_.back().activation == Activation::Sigmoid;
}

MlpNetwork MlpNetwork::without_head() const {
    if (layers_.empty()) throw ValidationError("network has no layers");
    MlpNetwork out(input_width_);
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) out.layers_.push_back(layers_[i]);
    for (const auto& d : dropouts_)
        if (d.after_layer + 1 < layers_.size()) out.dropouts_.push_back(d);
    return out;
}

void MlpNetwork::set_trainable(bool trainable) {
    for (auto& l : layers_) l.trainable = trainable;
}

std::size_t MlpNetwork::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.parameter_count();
    return n;
}

ParameterRefs MlpNetwork::parameters() {
    ParameterRefs refs;
    for (auto& l : layers_) {
        refs.emplace_back(l.weights.values());
        refs.emplace_back(l.biases);
    }
    return refs;
}

ConstParameterRefs MlpNetwork::parameters() const {
    ConstParameterRefs refs;
    for (const auto& l : layers_) {
        refs.emplace_back(l.weights.values());
        refs.emplace_back(l.biases);
    }
    return refs;
}

bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weights == b.weights && a.biases == b.biases && a.activation == b.activation &&
           a.trainable == b.trainable;
}

bool operator==(const MlpNetwork& a, const MlpNetwork& b) {
    if (a.input_width_ != b.input_width_ || a.layers_ != b.layers_ || a.dropouts_.size() != b.dropouts_.size())
        return false;
    for (std::size_t i = 0; i < a.dropouts_.size(); ++i) {
        if (a.dropouts_[i].rate != b.dropouts_[i].rate || a.dropouts_[i].after_layer != b.dropouts_[i].after_layer)
            return false;
    }
    return true;
}

// --- forward ----------------------------------------------------------------

namespace {

void apply_activation(const Matrix& pre, Matrix& post, Activation act) {
    const auto in = pre.values();
    auto out = post.values();
    switch (act) {
        case Activation::ReLU:
            for (std::size_t i = 0; i < in.size(); ++i) out[i] = relu(in[i]);
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < in.size(); ++i) out[i] = sigmoid(in[i]);
            break;
        case Activation::Identity:
            std::copy(in.begin(), in.end(), out.begin());
            break;
    }
}

Matrix draw_mask(std::size_t rows, std::size_t cols, double rate, RandomStream& rng) {
    Matrix mask(rows, cols);
    const double keep_scale = 1.0 / (1.0 - rate);
    std::bernoulli_distribution keep(1.0 - rate);
    for (double& m : mask.values()) m = keep(rng) ? keep_scale : 0.0;
    return mask;
}

// Multiplies dA by the activation derivative in place, turning it into dZ.
void activation_backward(Matrix& grad, const Matrix& pre, const Matrix& post, Activation act) {
    auto g = grad.values();
    switch (act) {
        case Activation::ReLU: {
            const auto z = pre.values();
            for (std::size_t i = 0; i < g.size(); ++i)
                if (!(z[i] > 0.0)) g[i] = 0.0;
            break;
        }
        case Activation::Sigmoid: {
            const auto s = post.values();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= s[i] * (1.0 - s[i]);
            break;
        }
        case Activation::Identity: break;
    }
}

void multiply_in_place(Matrix& a, const Matrix& b) {
    auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) av[i] *= bv[i];
}

Gradients zero_gradients(const MlpNetwork& net) {
    Gradients g;
    g.layers.reserve(net.depth());
    for (const auto& l : net.layers())
        g.layers.push_back({Matrix(l.fan_in(), l.fan_out()), std::vector<double>(l.fan_out(), 0.0)});
    return g;
}

void check_cache(const MlpNetwork& net, const ForwardCache& cache) {
    const std::size_t depth = net.depth();
    if (cache.inputs.size() != depth || cache.pre.size() != depth || cache.post.size() != depth ||
        cache.masks.size() != depth) {
        throw ValidationError("forward cache does not match network depth");
    }
    const std::size_t n = cache.batch_size();
    for (std::size_t l = 0; l < depth; ++l) {
        const auto& m = cache.masks[l];
        if (!m.empty() && (m.rows() != n || m.cols() != net.layers()[l].fan_out()))
            throw ValidationError("dropout mask " + std::to_string(l) + " does not match batch");
        if (cache.pre[l].rows() != n) throw ValidationError("forward cache batch size mismatch");
    }
}

// Reverse pass starting from dLoss/dZ of the last layer.
Gradients backward_from_pre(const MlpNetwork& net, const ForwardCache& cache, Matrix dz, Matrix* d_input) {
    Gradients grads = zero_gradients(net);
    const auto& layers = net.layers();
    std::size_t first_trainable = layers.size();
    for (std::size_t l = 0; l < layers.size(); ++l)
        if (layers[l].trainable) {
            first_trainable = l;
            break;
        }

    for (std::size_t l = layers.size(); l-- > 0;) {
        const DenseLayer& layer = layers[l];
        if (layer.trainable) {
            grads.layers[l].weights = kernels::matmul_tn(cache.inputs[l], dz);
            grads.layers[l].biases = kernels::column_sums(dz);
        }
        const bool need_input_grad = (l > 0 && l > first_trainable) || (d_input != nullptr);
        if (!need_input_grad) break;
        Matrix dx = kernels::matmul_nt(dz, layer.weights);
        if (l == 0) {
            *d_input = std::move(dx);
            break;
        }
        if (!cache.masks[l - 1].empty()) multiply_in_place(dx, cache.masks[l - 1]);
        activation_backward(dx, cache.pre[l - 1], cache.post[l - 1], layers[l - 1].activation);
        dz = std::move(dx);
    }
    return grads;
}

}  // namespace

ForwardCache forward(const MlpNetwork& net, const Matrix& batch, Mode mode, RandomStream* rng) {
    if (batch.cols() != net.input_width()) {
        throw ValidationError("input width mismatch: network expects " + std::to_string(net.input_width()) +
                              " columns, batch has " + std::to_string(batch.cols()));
    }
    if (net.depth() == 0) throw ValidationError("network has no layers");
    ForwardCache cache;
    const std::size_t depth = net.depth();
    cache.inputs.reserve(depth);
    cache.pre.reserve(depth);
    cache.post.reserve(depth);
    cache.masks.resize(depth);

    Matrix current = batch;
    for (std::size_t l = 0; l < depth; ++l) {
        const DenseLayer& layer = net.layers()[l];
        Matrix z = kernels::matmul(current, layer.weights);
        kernels::add_row_vector(z, layer.biases);
        Matrix a(z.rows(), z.cols());
        apply_activation(z, a, layer.activation);
        cache.inputs.push_back(std::move(current));
        Matrix next = a;
        const auto rate = net.dropout_after(l);
        if (mode == Mode::Train && rate && *rate > 0.0) {
            if (rng == nullptr) throw ValidationError("train-mode forward with dropout needs a random stream");
            cache.masks[l] = draw_mask(a.rows(), a.cols(), *rate, *rng);
            multiply_in_place(next, cache.masks[l]);
        }
        cache.pre.push_back(std::move(z));
        cache.post.push_back(std::move(a));
        current = std::move(next);
    }
    cache.output = std::move(current);
    return cache;
}

Matrix infer(const MlpNetwork& net, const Matrix& batch) {
    if (batch.cols() != net.input_width()) {
        throw ValidationError("input width mismatch: network expects " + std::to_string(net.input_width()) +
                              " columns, batch has " + std::to_string(batch.cols()));
    }
    Matrix current = batch;
    for (const auto& layer : net.layers()) {
        Matrix z = kernels::matmul(current, layer.weights);
        kernels::add_row_vector(z, layer.biases);
        apply_activation(z, z, layer.activation);
        current = std::move(z);
    }
    return current;
}

// --- gradients --------------------------------------------------------------

ConstParameterRefs Gradients::refs() const {
    ConstParameterRefs out;
    for (const auto& l : layers) {
        out.emplace_back(l.weights.values());
        out.emplace_back(l.biases);
    }
    return out;
}

bool Gradients::all_zero() const noexcept {
    for (const auto& l : layers) {
        for (double v : l.weights.values())
            if (v != 0.0) return false;
        for (double v : l.biases)
            if (v != 0.0) return false;
    }
    return true;
}

Gradients backprop(const MlpNetwork& net, const ForwardCache& cache, std::span<const int> labels) {
    if (!net.is_classifier()) throw ValidationError("backprop: network must end in a single sigmoid node");
    check_cache(net, cache);
    const std::size_t n = cache.batch_size();
    if (labels.size() != n) {
        throw ValidationError("backprop: " + std::to_string(labels.size()) + " labels for batch of " +
                              std::to_string(n));
    }
    if (n == 0) throw ValidationError("backprop: empty batch");
    if (!cache.masks.back().empty()) throw ValidationError("backprop: dropout on the output node is not supported");
    // Sigmoid + mean BCE: dL/dz = (s - y) / n.
    Matrix dz(n, 1);
    const auto& s = cache.post.back();
    for (std::size_t i = 0; i < n; ++i) dz(i, 0) = (s(i, 0) - labels[i]) / static_cast<double>(n);
    return backward_from_pre(net, cache, std::move(dz), nullptr);
}

Gradients backward(const MlpNetwork& net, const ForwardCache& cache, const Matrix& d_output, Matrix* d_input) {
    check_cache(net, cache);
    if (d_output.rows() != cache.batch_size() || d_output.cols() != net.output_width())
        throw ValidationError("backward: output gradient shape mismatch");
    Matrix dz = d_output;
    const std::size_t last = net.depth() - 1;
    if (!cache.masks[last].empty()) multiply_in_place(dz, cache.masks[last]);
    activation_backward(dz, cache.pre[last], cache.post[last], net.layers()[last].activation);
    return backward_from_pre(net, cache, std::move(dz), d_input);
}

double bce_loss(std::span<const double> scores, std::span<const int> labels) {
    if (scores.empty()) throw ValidationError("bce_loss: empty input");
    if (scores.size() != labels.size()) throw ValidationError("bce_loss: scores and labels differ in length");
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i])) throw TrainingError("bce_loss: NaN score at index " + std::to_string(i));
        const double s = std::clamp(scores[i], kBceClamp, 1.0 - kBceClamp);
        total -= labels[i] == 1 ? std::log(s) : std::log(1.0 - s);
    }
    return total / static_cast<double>(scores.size());
}

}  // namespace gapnet
