#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "declinecast/dataset.hpp"
#include "declinecast/nn/network.hpp"
#include "declinecast/nn/train.hpp"

namespace declinecast {

inline constexpr double kTrainFraction = 0.75;
inline constexpr double kValidationFraction = 0.10;

enum class CountyModelKind { transfer_trained, source_as_is };

std::string to_string(CountyModelKind k);

struct TransferPlan {
    std::string target_county;
    std::size_t n_input = 6;
    std::size_t scarce_threshold = 40;
    nn::TrainConfig source_cfg{};
    nn::TrainConfig head_cfg{};
    nn::Architecture arch{};

    void validate() const;
};

/// Disk cache of trained source models, laid out as
/// <root>/<dataset-hash>/<county>/<n_input>/<seed>-<config-hash>.model.
/// Concurrent readers are fine; writes are serialized and atomic.
class SourceCache {
public:
    explicit SourceCache(std::filesystem::path root) : root_(std::move(root)) {}

    std::filesystem::path path_for(std::uint64_t dataset_hash, const std::string& county,
                                   std::size_t n_input, std::uint64_t seed,
                                   std::uint64_t config_hash) const;
    std::optional<nn::NetworkModel> find(const std::filesystem::path& p) const;
    void store(const std::filesystem::path& p, const nn::NetworkModel& model);

    const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::filesystem::path root_;
    mutable std::mutex write_mutex_;
};

/// Fingerprint of everything besides data and seed that shapes a source model.
std::uint64_t source_config_hash(const nn::TrainConfig& cfg, const nn::Architecture& arch);

/// Cache root: $DECLINECAST_CACHE when set, otherwise "cache".
std::filesystem::path default_cache_dir();

/// Trains a full network on every well outside excluded_county. The scaler is
/// fitted on that same pool and 10% of it is held out for validation.
nn::TrainResult train_source(const Dataset& full, const std::string& excluded_county,
                             std::size_t n_input, const nn::TrainConfig& cfg, std::uint64_t seed,
                             const nn::Architecture& arch = {}, SourceCache* cache = nullptr);

/// Knowledge-transfer layers copied and frozen, fresh trainable output layer.
nn::NetworkModel derive_target(const nn::NetworkModel& source, std::size_t m_output, Rng& rng);

/// Trains the head on a county's training wells (10% held out for
/// validation). Verifies the frozen layers did not move.
nn::TrainResult train_target(const nn::NetworkModel& target, const Dataset& county_train,
                             std::size_t n_input, const nn::TrainConfig& cfg, std::uint64_t seed);

struct CountyModel {
    nn::NetworkModel model;
    nn::NetworkModel source;
    CountyModelKind kind = CountyModelKind::transfer_trained;
    Dataset test;
    Dataset county_train;  // empty on the scarce path
    Dataset source_pool;
    nn::TrainHistory source_history;
    nn::TrainHistory head_history;
};

CountyModel county_model(const Dataset& full, const TransferPlan& plan, std::uint64_t seed,
                         SourceCache* cache = nullptr);

}  // namespace declinecast
