#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "declinecast/arps.hpp"
#include "declinecast/rng.hpp"

namespace declinecast {

/// One well and its per-month production volumes (Mscf).
struct WellRecord {
    std::string api_id;
    std::string county;
    std::string state;
    std::vector<double> production;
};

/// Fixed-length collection of wells. Invariants are checked on construction.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<WellRecord> wells, std::size_t months);

    const std::vector<WellRecord>& wells() const noexcept { return wells_; }
    std::size_t months() const noexcept { return months_; }
    std::size_t size() const noexcept { return wells_.size(); }
    bool empty() const noexcept { return wells_.empty(); }
    const WellRecord& operator[](std::size_t i) const { return wells_[i]; }

    Dataset filter(const std::function<bool(const WellRecord&)>& keep) const;
    Dataset county(const std::string& name) const;
    Dataset excluding_county(const std::string& name) const;
    bool has_county(const std::string& name) const;

    /// Stable content hash over ids, counties, states and production bits.
    std::uint64_t content_hash() const;

private:
    std::vector<WellRecord> wells_;
    std::size_t months_ = 0;
};

struct WindowPair {
    std::vector<double> input;
    std::vector<double> label;
};

struct Partition {
    Dataset first;
    Dataset second;
};

Dataset read_csv(std::istream& in, std::optional<std::size_t> expected_months = std::nullopt);
Dataset load_csv(const std::string& path, std::optional<std::size_t> expected_months = std::nullopt);
void write_csv(std::ostream& out, const Dataset& ds);
void save_csv(const std::string& path, const Dataset& ds);

std::map<std::string, std::size_t> county_counts(const Dataset& ds);

/// Counties in order of first appearance.
std::vector<std::string> county_names(const Dataset& ds);

std::size_t train_size(std::size_t n, double train_frac);
std::size_t validation_size(std::size_t n, double val_frac);

/// (train, test); train receives ceil(train_frac * n) wells.
Partition shuffle_split(const Dataset& ds, double train_frac, Rng& rng);

/// (fit, val); val receives max(1, round(val_frac * n)) wells.
Partition validation_split(const Dataset& train, double val_frac, Rng& rng);

WindowPair window(const WellRecord& well, std::size_t n_input);

/// Max-normalization fitted on training data only.
struct Scaler {
    double scale = 1.0;

    std::vector<double> apply(std::span<const double> v) const;
    std::vector<double> invert(std::span<const double> v) const;
};

Scaler fit_scaler(const Dataset& train);

struct CountySynth {
    std::string name;
    double qi_min, qi_max;
    double b_min, b_max;
    double di_min, di_max;
    std::size_t wells = 0;  // 0 = SynthConfig::wells_per_county
};

struct SynthConfig {
    std::vector<CountySynth> counties;
    double noise = 0.0;  // multiplicative relative std dev
    std::size_t wells_per_county = 0;
    std::size_t months = 60;
    std::string state = "Synthetic";

    void validate() const;
};

struct TruthRow {
    std::string api_id;
    ArpsParams params;
};

struct SynthResult {
    Dataset data;
    std::vector<TruthRow> truth;
};

SynthResult synth_generate(const SynthConfig& cfg, Rng& rng);

void write_truth_csv(std::ostream& out, std::span<const TruthRow> truth);
std::vector<TruthRow> read_truth_csv(std::istream& in);

/// Shortest round-trip decimal form.
std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace declinecast
