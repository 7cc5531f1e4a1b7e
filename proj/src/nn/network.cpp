#include "declinecast/nn/network.hpp"

#include <algorithm>
#include <cmath>

#include "declinecast/errors.hpp"
#include "declinecast/nn/kernels.hpp"

namespace declinecast::nn {

namespace k = kernels::parallel;

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "linear"; }

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "linear") return Activation::linear;
    throw DataError("unknown activation '" + s + "'");
}

std::size_t NetworkModel::parameter_count(bool trainable_only) const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers)
        if (!trainable_only || l.trainable) n += l.parameter_count();
    return n;
}

std::vector<std::size_t> NetworkModel::widths() const {
    std::vector<std::size_t> w;
    for (const auto& l : layers) w.push_back(l.out());
    return w;
}

void NetworkModel::validate() const {
    if (layers.empty()) throw ConfigError("network has no layers");
    if (dropout_rates.size() + 1 != layers.size())
        throw ConfigError("network needs one dropout rate per hidden layer");
    if (layers.front().in() != n_input) throw ConfigError("first layer width does not match n_input");
    if (layers.back().out() != m_output) throw ConfigError("last layer width does not match m_output");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.biases.size() != l.out()) throw ConfigError("bias length mismatch");
        if (i > 0 && layers[i - 1].out() != l.in()) throw ConfigError("layer widths do not chain");
    }
    for (double r : dropout_rates)
        if (!(r >= 0.0 && r < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
}

DenseLayer make_layer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
    DenseLayer l;
    l.weights = Matrix(out, in);
    l.biases.assign(out, 0.0);
    l.activation = act;
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& w : l.weights.data) w = u(rng);
    return l;
}

NetworkModel build_network(std::size_t n_input, std::size_t m_output, Rng& rng,
                           const Architecture& arch) {
    if (n_input < 1 || m_output < 1) throw ConfigError("network needs n_input, m_output >= 1");
    NetworkModel m;
    m.n_input = n_input;
    m.m_output = m_output;
    std::size_t prev = n_input;
    for (auto width : arch.hidden) {
        m.layers.push_back(make_layer(prev, width, Activation::relu, rng));
        m.dropout_rates.push_back(arch.dropout);
        prev = width;
    }
    m.layers.push_back(make_layer(prev, m_output, Activation::linear, rng));
    m.validate();
    return m;
}

Matrix forward_batch(const NetworkModel& model, const Matrix& input, Mode mode, Rng* rng,
                     ForwardCache* cache) {
    if (input.cols != model.n_input)
        throw ConfigError("input width " + std::to_string(input.cols) + " does not match n_input " +
                          std::to_string(model.n_input));
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
        cache->masks.clear();
    }
    Matrix x = input;
    Matrix y;
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const auto& layer = model.layers[li];
        k::dense_forward(x, layer.weights, layer.biases, y);
        if (cache) {
            cache->inputs.push_back(std::move(x));
            cache->pre.push_back(y);
        }
        if (layer.activation == Activation::relu)
            for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
        Matrix mask;
        if (li + 1 < model.layers.size() && mode == Mode::train && model.dropout_rates[li] > 0.0) {
            if (!rng) throw ConfigError("train-mode forward with dropout needs a random stream");
            const double rate = model.dropout_rates[li];
            const double keep_scale = 1.0 / (1.0 - rate);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            mask = Matrix(y.rows, y.cols);
            for (std::size_t j = 0; j < y.size(); ++j) {
                mask.data[j] = u(*rng) < rate ? 0.0 : keep_scale;
                y.data[j] *= mask.data[j];
            }
        }
        if (cache) cache->masks.push_back(std::move(mask));
        x = std::move(y);
    }
    return x;
}

std::vector<double> forward(const NetworkModel& model, std::span<const double> input, Mode mode,
                            Rng* rng) {
    Matrix x(1, input.size());
    std::copy(input.begin(), input.end(), x.data.begin());
    return forward_batch(model, x, mode, rng).data;
}

double mae_loss(std::span<const double> pred, std::span<const double> label) {
    if (pred.size() != label.size() || pred.empty())
        throw ConfigError("mae_loss needs equal, non-zero lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - label[i]);
    return s / static_cast<double>(pred.size());
}

Gradients backward(const NetworkModel& model, const ForwardCache& cache, const Matrix& output,
                   const Matrix& labels) {
    if (!output.same_shape(labels)) throw ConfigError("backward: prediction/label shape mismatch");
    if (cache.inputs.size() != model.layers.size()) throw ConfigError("backward: stale forward cache");
    Gradients grads;
    const auto first_trainable = std::find_if(model.layers.begin(), model.layers.end(),
                                              [](const DenseLayer& l) { return l.trainable; });
    if (first_trainable == model.layers.end()) return grads;
    const std::size_t stop = static_cast<std::size_t>(first_trainable - model.layers.begin());

    // d(mean |pred - label|)/d pred, with sign(0) = 0
    const double scale = 1.0 / static_cast<double>(output.size());
    Matrix delta(output.rows, output.cols);
    for (std::size_t j = 0; j < output.size(); ++j) {
        const double r = output.data[j] - labels.data[j];
        delta.data[j] = r > 0.0 ? scale : (r < 0.0 ? -scale : 0.0);
    }

    for (std::size_t li = model.layers.size(); li-- > stop;) {
        const auto& layer = model.layers[li];
        if (layer.activation == Activation::relu) {
            const auto& pre = cache.pre[li];
            for (std::size_t j = 0; j < delta.size(); ++j)
                if (!(pre.data[j] > 0.0)) delta.data[j] = 0.0;
        }
        if (layer.trainable) {
            LayerGradient g;
            g.biases.assign(layer.out(), 0.0);
            k::dense_param_grad(cache.inputs[li], delta, g.weights, g.biases);
            grads.emplace(li, std::move(g));
        }
        if (li == stop) break;
        Matrix dx;
        k::dense_input_grad(delta, layer.weights, dx);
        const auto& mask = cache.masks[li - 1];
        if (!mask.data.empty())
            for (std::size_t j = 0; j < dx.size(); ++j) dx.data[j] *= mask.data[j];
        delta = std::move(dx);
    }
    return grads;
}

void adam_step(NetworkModel& model, AdamState& state, const Gradients& grads, const AdamConfig& cfg) {
    ++state.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    auto update = [&](std::span<double> w, std::span<const double> g, std::span<double> m,
                      std::span<double> v) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            w[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    };
    for (const auto& [li, g] : grads) {
        if (li >= model.layers.size()) throw ConfigError("adam_step: gradient for unknown layer");
        auto& layer = model.layers[li];
        if (!layer.trainable) throw ConfigError("adam_step: gradient for a frozen layer");
        if (!g.weights.same_shape(layer.weights) || g.biases.size() != layer.biases.size())
            throw ConfigError("adam_step: gradient shape mismatch");
        auto [mit, fresh] = state.m.try_emplace(li);
        auto& vs = state.v[li];
        if (fresh) {
            mit->second = {Matrix(layer.out(), layer.in()), std::vector<double>(layer.out(), 0.0)};
            vs = mit->second;
        }
        auto& ms = mit->second;
        if (!ms.weights.same_shape(g.weights) || ms.biases.size() != g.biases.size())
            throw ConfigError("adam_step: optimizer state shape mismatch");
        update(layer.weights.data, g.weights.data, ms.weights.data, vs.weights.data);
        update(layer.biases, g.biases, ms.biases, vs.biases);
    }
}

std::vector<double> predict(const NetworkModel& model, std::span<const double> raw_input) {
    if (!model.scaler) throw ConfigError("predict: model has no fitted scaler");
    if (raw_input.size() != model.n_input)
        throw ConfigError("predict: expected " + std::to_string(model.n_input) + " input months, got " +
                          std::to_string(raw_input.size()));
    auto out = model.scaler->invert(forward(model, model.scaler->apply(raw_input)));
    for (auto& v : out) v = std::max(v, 0.0);
    return out;
}

}  // namespace declinecast::nn
