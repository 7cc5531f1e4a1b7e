#include "declinecast/nn/train.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "declinecast/errors.hpp"

namespace declinecast::nn {

void TrainConfig::validate() const {
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (patience < 0 || patience > max_epochs) throw ConfigError("patience must lie in [0, max_epochs]");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(adam.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0) || !(adam.beta2 > 0.0 && adam.beta2 < 1.0))
        throw ConfigError("Adam betas must lie in (0, 1)");
    if (!(adam.epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
}

WindowBatch make_windows(const Dataset& ds, std::size_t n_input, const Scaler& scaler) {
    if (n_input < 1 || n_input >= ds.months())
        throw ConfigError("n_input must lie in [1, months)");
    const std::size_t m_output = ds.months() - n_input;
    WindowBatch b{Matrix(ds.size(), n_input), Matrix(ds.size(), m_output)};
    for (std::size_t s = 0; s < ds.size(); ++s) {
        const auto& p = ds[s].production;
        for (std::size_t i = 0; i < n_input; ++i) b.inputs(s, i) = p[i] / scaler.scale;
        for (std::size_t j = 0; j < m_output; ++j) b.labels(s, j) = p[n_input + j] / scaler.scale;
    }
    return b;
}

double evaluate_mae(const NetworkModel& model, const WindowBatch& data) {
    const Matrix pred = forward_batch(model, data.inputs, Mode::infer);
    return mae_loss(pred.data, data.labels.data);
}

namespace {

void gather(const Matrix& src, std::span<const std::size_t> rows, Matrix& dst) {
    dst = Matrix(rows.size(), src.cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto from = src.row(rows[r]);
        std::copy(from.begin(), from.end(), dst.row(r).begin());
    }
}

}  // namespace

TrainResult train(NetworkModel model, const Dataset& fit, const Dataset& val, std::size_t n_input,
                  const TrainConfig& cfg, const ValidationHook& hook) {
    cfg.validate();
    model.validate();
    if (fit.empty() || val.empty()) throw DataError("training needs non-empty fit and validation sets");
    if (!model.scaler) throw ConfigError("train: model has no scaler");
    if (model.n_input != n_input || fit.months() != val.months() ||
        model.m_output + n_input != fit.months())
        throw ConfigError("train: model shape does not match the data windows");

    const WindowBatch fit_data = make_windows(fit, n_input, *model.scaler);
    const WindowBatch val_data = make_windows(val, n_input, *model.scaler);

    Rng rng(cfg.seed);
    AdamState adam;
    TrainHistory hist;
    std::vector<DenseLayer> best = model.layers;
    double best_val = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order(fit.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Matrix xb, yb;
    ForwardCache cache;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, order.size() - start);
            const std::span<const std::size_t> rows(order.data() + start, len);
            gather(fit_data.inputs, rows, xb);
            gather(fit_data.labels, rows, yb);
            const Matrix out = forward_batch(model, xb, Mode::train, &rng, &cache);
            loss_sum += mae_loss(out.data, yb.data) * static_cast<double>(len);
            const Gradients grads = backward(model, cache, out, yb);
            adam_step(model, adam, grads, cfg.adam);
        }
        hist.train_loss.push_back(loss_sum / static_cast<double>(order.size()));

        const double v = hook ? hook(model, epoch) : evaluate_mae(model, val_data);
        hist.val_loss.push_back(v);
        if (v < best_val) {
            best_val = v;
            hist.best_epoch = epoch;
            best = model.layers;
        } else if (cfg.patience > 0 && epoch - hist.best_epoch >= cfg.patience) {
            hist.stopped_early = true;
            break;
        }
    }
    if (hist.best_epoch > 0) model.layers = std::move(best);
    return {std::move(model), std::move(hist)};
}

}  // namespace declinecast::nn
