#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "declinecast/arps.hpp"
#include "declinecast/dataset.hpp"
#include "declinecast/transfer.hpp"

namespace declinecast {

struct WellResult {
    std::string api_id;
    std::string county;
    double dnn_mae = 0.0;
    double arps_mae = 0.0;
    bool lm_fallback = false;
};

/// Actual vs forecast series of one test well, for plotting.
struct SampleForecast {
    std::string api_id;
    std::size_t n_input = 0;
    std::vector<double> actual;
    std::vector<double> dnn;   // months n_input..N-1
    std::vector<double> arps;  // months n_input..N-1
};

struct CountyTrial {
    std::string county;
    CountyModelKind kind = CountyModelKind::transfer_trained;
    std::size_t test_wells = 0;
    double mean_dnn_mae = 0.0;
    double mean_arps_mae = 0.0;
    double sd_dnn_mae = 0.0;
    double sd_arps_mae = 0.0;
    double reduction = 0.0;
    std::size_t lm_fallbacks = 0;
    std::vector<WellResult> wells;
    std::optional<SampleForecast> sample;
};

struct TrialReport {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t n_input = 0;
    std::vector<CountyTrial> counties;
    double overall_reduction = 0.0;
};

struct CountyAggregate {
    std::string county;
    double mean_dnn_mae = 0.0;
    double mean_arps_mae = 0.0;
    double mean_reduction = 0.0;
    double test_wells = 0.0;  // mean over trials
};

struct AggregateReport {
    std::size_t n_input = 0;
    std::size_t trials = 0;
    std::vector<CountyAggregate> counties;
    double overall_reduction = 0.0;
    std::vector<double> trial_overall;  // Eq. 2 value of each trial, by index
};

struct HarnessConfig {
    std::size_t scarce_threshold = 40;
    nn::TrainConfig source_cfg{};
    nn::TrainConfig head_cfg{};
    nn::Architecture arch{};
    LmConfig lm{};
    SourceCache* cache = nullptr;
    bool keep_samples = true;
};

double well_mae(std::span<const double> forecast, std::span<const double> actual);

/// 1 - dnn / arps over county-mean MAEs.
double error_reduction(double mean_dnn_mae, double mean_arps_mae);

/// Test-well-count weighted mean of per-county reductions.
double overall_reduction(std::span<const double> reductions, std::span<const double> test_counts);

struct ArpsBenchmark {
    std::vector<double> forecast;
    ArpsParams params;
    bool fallback = false;
};

/// Refit from the baseline; retry once from the default init; otherwise fall
/// back to the baseline parameters.
ArpsBenchmark arps_benchmark(const ArpsParams& baseline, std::span<const double> input,
                             std::size_t months, const LmConfig& lm);

TrialReport run_trial(const Dataset& full, std::span<const std::string> counties, std::size_t n_input,
                      std::uint64_t seed, const HarnessConfig& cfg);

struct BenchmarkRun {
    AggregateReport aggregate;
    std::vector<TrialReport> trials;
};

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial);

AggregateReport aggregate(std::span<const TrialReport> trials);

/// Trials run on up to `jobs` threads; results do not depend on scheduling.
BenchmarkRun run_trials(const Dataset& full, std::span<const std::string> counties,
                        std::size_t n_input, std::size_t k, std::uint64_t master_seed,
                        const HarnessConfig& cfg, int jobs = 1);

void check_counties(const Dataset& full, std::span<const std::string> counties);

}  // namespace declinecast
