#include "declinecast/transfer.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "declinecast/errors.hpp"
#include "declinecast/nn/model_io.hpp"

namespace declinecast {

std::string to_string(CountyModelKind k) {
    return k == CountyModelKind::transfer_trained ? "transfer_trained" : "source_as_is";
}

void TransferPlan::validate() const {
    if (target_county.empty()) throw ConfigError("transfer plan needs a target county");
    if (scarce_threshold != 0 && scarce_threshold < 4)
        throw ConfigError("scarce_threshold must be 0 (off) or >= 4");
    source_cfg.validate();
    head_cfg.validate();
}

namespace {

std::string path_safe(const std::string& s) {
    std::string out;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out.empty() ? std::string("_") : out;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::filesystem::path SourceCache::path_for(std::uint64_t dataset_hash, const std::string& county,
                                            std::size_t n_input, std::uint64_t seed,
                                            std::uint64_t config_hash) const {
    return root_ / hex(dataset_hash) / path_safe(county) / std::to_string(n_input) /
           (std::to_string(seed) + "-" + hex(config_hash) + ".model");
}

std::optional<nn::NetworkModel> SourceCache::find(const std::filesystem::path& p) const {
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) return std::nullopt;
    return nn::load_model(p.string());
}

void SourceCache::store(const std::filesystem::path& p, const nn::NetworkModel& model) {
    std::lock_guard lock(write_mutex_);
    std::filesystem::create_directories(p.parent_path());
    auto tmp = p;
    tmp += ".tmp";
    nn::save_model(model, tmp.string());
    std::filesystem::rename(tmp, p);
}

std::uint64_t source_config_hash(const nn::TrainConfig& cfg, const nn::Architecture& arch) {
    std::string key = std::to_string(cfg.max_epochs) + ' ' + std::to_string(cfg.patience) + ' ' +
                      std::to_string(cfg.batch_size) + ' ' + format_double(cfg.adam.learning_rate) +
                      ' ' + format_double(cfg.adam.beta1) + ' ' + format_double(cfg.adam.beta2) +
                      ' ' + format_double(cfg.adam.epsilon) + " | " + format_double(arch.dropout);
    for (auto w : arch.hidden) key += ' ' + std::to_string(w);
    return fnv1a(key);
}

std::filesystem::path default_cache_dir() {
    if (const char* env = std::getenv("DECLINECAST_CACHE"); env && *env) return env;
    return "cache";
}

nn::TrainResult train_source(const Dataset& full, const std::string& excluded_county,
                             std::size_t n_input, const nn::TrainConfig& cfg, std::uint64_t seed,
                             const nn::Architecture& arch, SourceCache* cache) {
    const Dataset pool = full.excluding_county(excluded_county);
    if (pool.empty())
        throw DataError("excluding county '" + excluded_county + "' leaves no source wells");
    if (n_input < 1 || n_input >= full.months())
        throw ConfigError("n_input must lie in [1, months)");

    std::filesystem::path cached;
    if (cache) {
        cached = cache->path_for(full.content_hash(), excluded_county, n_input, seed,
                                 source_config_hash(cfg, arch));
        if (auto hit = cache->find(cached)) return {std::move(*hit), {}};
    }

    Rng init_rng(derive_seed(seed, "source-init"));
    nn::NetworkModel model = nn::build_network(n_input, full.months() - n_input, init_rng, arch);
    model.scaler = fit_scaler(pool);

    Rng split_rng(derive_seed(seed, "source-split"));
    const auto parts = validation_split(pool, kValidationFraction, split_rng);
    nn::TrainConfig c = cfg;
    c.seed = derive_seed(seed, "source-train");
    auto result = nn::train(std::move(model), parts.first, parts.second, n_input, c);
    if (cache) cache->store(cached, result.model);
    return result;
}

nn::NetworkModel derive_target(const nn::NetworkModel& source, std::size_t m_output, Rng& rng) {
    source.validate();
    nn::NetworkModel t;
    t.n_input = source.n_input;
    t.m_output = m_output;
    t.scaler = source.scaler;
    t.dropout_rates = source.dropout_rates;
    t.layers.assign(source.layers.begin(), source.layers.end() - 1);
    for (auto& l : t.layers) l.trainable = false;
    const std::size_t head_in = t.layers.empty() ? source.n_input : t.layers.back().out();
    auto head = nn::make_layer(head_in, m_output, nn::Activation::linear, rng);
    head.trainable = true;
    t.layers.push_back(std::move(head));
    t.validate();
    return t;
}

nn::TrainResult train_target(const nn::NetworkModel& target, const Dataset& county_train,
                             std::size_t n_input, const nn::TrainConfig& cfg, std::uint64_t seed) {
    std::size_t trainable = 0;
    for (const auto& l : target.layers) trainable += l.trainable ? 1 : 0;
    if (trainable != 1 || !target.layers.back().trainable)
        throw ConfigError("train_target expects exactly one trainable (output) layer");

    Rng split_rng(derive_seed(seed, "head-split"));
    const auto parts = validation_split(county_train, kValidationFraction, split_rng);
    nn::TrainConfig c = cfg;
    c.seed = derive_seed(seed, "head-train");
    auto result = nn::train(target, parts.first, parts.second, n_input, c);

    for (std::size_t i = 0; i + 1 < target.layers.size(); ++i)
        if (!(result.model.layers[i] == target.layers[i]))
            throw NumericalError("frozen layer " + std::to_string(i) + " changed during head training");
    return result;
}

CountyModel county_model(const Dataset& full, const TransferPlan& plan, std::uint64_t seed,
                         SourceCache* cache) {
    plan.validate();
    const Dataset county = full.county(plan.target_county);
    if (county.empty()) throw ConfigError("county '" + plan.target_county + "' is not in the dataset");

    CountyModel cm;
    cm.source_pool = full.excluding_county(plan.target_county);
    auto src = train_source(full, plan.target_county, plan.n_input, plan.source_cfg,
                            derive_seed(seed, "source"), plan.arch, cache);
    cm.source = std::move(src.model);
    cm.source_history = std::move(src.history);

    if (county.size() < plan.scarce_threshold) {
        cm.kind = CountyModelKind::source_as_is;
        cm.model = cm.source;
        cm.test = county;
        cm.county_train = Dataset({}, full.months());
        return cm;
    }

    Rng split_rng(derive_seed(seed, "county-split"));
    auto parts = shuffle_split(county, kTrainFraction, split_rng);
    cm.county_train = std::move(parts.first);
    cm.test = std::move(parts.second);

    Rng head_rng(derive_seed(seed, "head-init"));
    const auto target = derive_target(cm.source, full.months() - plan.n_input, head_rng);
    auto head = train_target(target, cm.county_train, plan.n_input, plan.head_cfg, seed);
    cm.model = std::move(head.model);
    cm.head_history = std::move(head.history);
    cm.kind = CountyModelKind::transfer_trained;
    return cm;
}

}  // namespace declinecast
