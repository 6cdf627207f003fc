#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gapnet/matrix.hpp"
#include "gapnet/random.hpp"

namespace gapnet {

enum class Activation { ReLU, Sigmoid, Identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

double sigmoid(double x) noexcept;
double relu(double x) noexcept;

struct DenseLayer {
    Matrix weights;  // fan_in x fan_out
    std::vector<double> biases;
    Activation activation = Activation::Identity;
    bool trainable = true;

    std::size_t fan_in() const noexcept { return weights.rows(); }
    std::size_t fan_out() const noexcept { return weights.cols(); }
    std::size_t parameter_count() const noexcept { return weights.size() + biases.size(); }
};

/// Inverted dropout applied to the output of layer `after_layer` in train mode.
struct DropoutSpec {
    double rate = 0.0;
    std::size_t after_layer = 0;
};

enum class Mode { Train, Infer };

/// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights.
Matrix glorot_init(std::size_t fan_in, std::size_t fan_out, RandomStream& rng);

/// Glorot weights, zero biases.
DenseLayer make_dense(std::size_t fan_in, std::size_t fan_out, Activation activation, RandomStream& rng);

/// Parameter spans in canonical order: for each layer, weights then biases.
using ParameterRefs = std::vector<std::span<double>>;
using ConstParameterRefs = std::vector<std::span<const double>>;

class MlpNetwork {
public:
    MlpNetwork() = default;
    explicit MlpNetwork(std::size_t input_width) : input_width_(input_width) {}

    void add_layer(DenseLayer layer);
    void add_dropout(DropoutSpec spec);

    std::size_t input_width() const noexcept { return input_width_; }
    std::size_t output_width() const noexcept;
    std::size_t depth() const noexcept { return layers_.size(); }

    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    const std::vector<DropoutSpec>& dropouts() const noexcept { return dropouts_; }

    /// Dropout rate applied after `layer`, if any.
    std::optional<double> dropout_after(std::size_t layer) const noexcept;

    /// Single sigmoid output node.
    bool is_classifier() const noexcept;

    /// Copy without the last layer; dropout following the removed layer is dropped too.
    MlpNetwork without_head() const;

    void set_trainable(bool trainable);

    std::size_t parameter_count() const noexcept;
    ParameterRefs parameters();
    ConstParameterRefs parameters() const;

    friend bool operator==(const MlpNetwork&, const MlpNetwork&);

private:
    std::size_t input_width_ = 0;
    std::vector<DenseLayer> layers_;
    std::vector<DropoutSpec> dropouts_;
};

bool operator==(const DenseLayer& a, const DenseLayer& b);

/// Everything backprop needs from a forward pass.
struct ForwardCache {
    std::vector<Matrix> inputs;  // matrix fed into each layer
    std::vector<Matrix> pre;     // pre-activations
    std::vector<Matrix> post;    // activations before dropout
    std::vector<Matrix> masks;   // inverted-dropout scale factors; empty when unused
    Matrix output;               // output of the last layer after dropout

    std::size_t batch_size() const noexcept { return inputs.empty() ? 0 : inputs.front().rows(); }
};

/// Forward pass. In train mode dropout masks are drawn from `rng` and recorded.
ForwardCache forward(const MlpNetwork& net, const Matrix& batch, Mode mode, RandomStream* rng = nullptr);

/// Inference-mode output of the network.
Matrix infer(const MlpNetwork& net, const Matrix& batch);

struct LayerGradient {
    Matrix weights;
    std::vector<double> biases;
};

struct Gradients {
    std::vector<LayerGradient> layers;

    ConstParameterRefs refs() const;
    bool all_zero() const noexcept;
};

/// Gradients of the mean binary cross-entropy w.r.t. all parameters of a
/// classifier network. Frozen layers get zero-filled slots.
Gradients backprop(const MlpNetwork& net, const ForwardCache& cache, std::span<const int> labels);

/// Gradients given dLoss/dOutput (output taken after any final dropout).
/// When `d_input` is non-null it receives dLoss/dInput.
Gradients backward(const MlpNetwork& net, const ForwardCache& cache, const Matrix& d_output,
                   Matrix* d_input = nullptr);

/// Scores are clamped to [1e-12, 1 - 1e-12] before the log.
double bce_loss(std::span<const double> scores, std::span<const int> labels);

inline constexpr double kBceClamp = 1e-12;

}  // namespace gapnet
