#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "declinecast/dataset.hpp"
#include "declinecast/nn/network.hpp"

namespace declinecast::nn {

struct TrainConfig {
    int max_epochs = 200;
    int patience = 10;  // 0 disables early stopping
    std::size_t batch_size = 32;
    AdamConfig adam{};
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    int best_epoch = 0;  // 1-based
    bool stopped_early = false;

    int epochs() const noexcept { return static_cast<int>(val_loss.size()); }
};

struct TrainResult {
    NetworkModel model;
    TrainHistory history;
};

/// Scaled (input, label) windows, one sample per row.
struct WindowBatch {
    Matrix inputs;
    Matrix labels;
};

WindowBatch make_windows(const Dataset& ds, std::size_t n_input, const Scaler& scaler);

/// Mean absolute error in scaled units over every label element, infer mode.
double evaluate_mae(const NetworkModel& model, const WindowBatch& data);

/// Replaces the per-epoch validation metric; receives the current weights and
/// the 1-based epoch index.
using ValidationHook = std::function<double(const NetworkModel&, int)>;

/// Mini-batch Adam on the batch-mean MAE with validation-driven early
/// stopping. Returns the weights from the best validation epoch. The model
/// must carry a scaler; only trainable layers are updated.
TrainResult train(NetworkModel model, const Dataset& fit, const Dataset& val, std::size_t n_input,
                  const TrainConfig& cfg, const ValidationHook& hook = {});

}  // namespace declinecast::nn
