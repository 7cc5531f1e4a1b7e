#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "declinecast/dataset.hpp"
#include "declinecast/nn/matrix.hpp"
#include "declinecast/rng.hpp"

namespace declinecast::nn {

enum class Activation { relu, linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
    Matrix weights;  // out x in
    std::vector<double> biases;
    Activation activation = Activation::relu;
    bool trainable = true;

    std::size_t in() const noexcept { return weights.cols; }
    std::size_t out() const noexcept { return weights.rows; }
    std::size_t parameter_count() const noexcept { return weights.size() + biases.size(); }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Feed-forward regression network. dropout_rates[k] is applied to the output
/// of layers[k]; the final layer is never followed by dropout.
struct NetworkModel {
    std::vector<DenseLayer> layers;
    std::vector<double> dropout_rates;
    std::size_t n_input = 0;
    std::size_t m_output = 0;
    std::optional<Scaler> scaler;

    std::size_t parameter_count(bool trainable_only = true) const noexcept;
    std::vector<std::size_t> widths() const;
    void validate() const;
};

struct Architecture {
    std::vector<std::size_t> hidden{30, 35, 50};
    double dropout = 0.1;
};

/// He-uniform initialised dense stack: ReLU hidden layers, linear output.
NetworkModel build_network(std::size_t n_input, std::size_t m_output, Rng& rng,
                           const Architecture& arch = {});

/// Fresh He-uniform layer.
DenseLayer make_layer(std::size_t in, std::size_t out, Activation act, Rng& rng);

enum class Mode { train, infer };

/// Intermediate values retained for backpropagation.
struct ForwardCache {
    std::vector<Matrix> inputs;  // input to each layer (after the previous dropout)
    std::vector<Matrix> pre;     // pre-activation of each layer
    std::vector<Matrix> masks;   // dropout multipliers after each hidden layer; empty when unused
};

/// Batched forward pass; one sample per row. Train mode draws inverted
/// dropout masks from rng.
Matrix forward_batch(const NetworkModel& model, const Matrix& input, Mode mode,
                     Rng* rng = nullptr, ForwardCache* cache = nullptr);

std::vector<double> forward(const NetworkModel& model, std::span<const double> input,
                            Mode mode = Mode::infer, Rng* rng = nullptr);

double mae_loss(std::span<const double> pred, std::span<const double> label);

struct LayerGradient {
    Matrix weights;
    std::vector<double> biases;
};

/// Keyed by layer index; frozen layers have no entry.
using Gradients = std::map<std::size_t, LayerGradient>;

/// Gradient of the batch-mean absolute error. The cache must come from the
/// forward pass that produced the predictions.
Gradients backward(const NetworkModel& model, const ForwardCache& cache, const Matrix& output,
                   const Matrix& labels);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::map<std::size_t, LayerGradient> m;
    std::map<std::size_t, LayerGradient> v;
    long step = 0;
};

void adam_step(NetworkModel& model, AdamState& state, const Gradients& grads, const AdamConfig& cfg);

/// Scales, runs inference, unscales and clamps at zero.
std::vector<double> predict(const NetworkModel& model, std::span<const double> raw_input);

}  // namespace declinecast::nn
