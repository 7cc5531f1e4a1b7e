#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "declinecast/dataset.hpp"
#include "declinecast/evaluate.hpp"
#include "declinecast/nn/train.hpp"

namespace declinecast::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalError = 3 };

struct TrainOverrides {
    std::optional<int> max_epochs;
    std::optional<int> patience;
    std::optional<std::size_t> batch_size;
    std::optional<double> learning_rate;

    void apply(nn::TrainConfig& cfg) const;
};

struct RunConfig {
    std::filesystem::path data_path;   // CSV export
    std::filesystem::path synth_path;  // or a synthetic-data config
    std::vector<std::string> counties;  // empty = every county
    std::vector<std::size_t> n_inputs{4, 6, 8, 10};
    std::size_t trials = 100;
    std::uint64_t seed = 2021;
    std::size_t scarce_threshold = 40;
    std::filesystem::path out_dir = "report";
    int jobs = 0;  // 0 = all available processors
    bool cache = false;
    nn::TrainConfig train{};

    void validate(std::size_t months) const;
};

/// Flag values; each set field wins over the configuration file.
struct RunOverrides {
    std::optional<std::vector<std::size_t>> n_inputs;
    std::optional<std::vector<std::string>> counties;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> scarce_threshold;
    std::optional<std::filesystem::path> out_dir;
    std::optional<int> jobs;
    bool cache = false;
    TrainOverrides train;
};

/// INI-style sections [data], [run], [train]. Relative paths resolve against
/// the file's directory. Unknown sections or keys are rejected.
RunConfig read_run_config(const std::filesystem::path& path);

/// [synth] seed, months, wells_per_county, noise, state and one
/// [county.<name>] section per county with qi_min/qi_max/b_min/b_max/di_min/di_max
/// and an optional per-county well count.
struct SynthFile {
    SynthConfig config;
    std::uint64_t seed = 0;
};
SynthFile read_synth_config(const std::filesystem::path& path);

Dataset load_run_data(const RunConfig& cfg);

std::filesystem::path truth_path_for(const std::filesystem::path& out_csv);

int default_jobs();

int cmd_ingest(const std::string& csv_path, std::ostream& out, std::ostream& err);
int cmd_synth(const std::string& config_path, const std::string& out_path, std::ostream& out,
              std::ostream& err);

struct ForecastArgs {
    std::string model_path;
    std::string wells_path;
    std::size_t n_input = 0;
    std::string arps_params_path;  // optional
    std::string out_path = "forecast.csv";
    std::string plot_dir;  // defaults to the output's directory
};
int cmd_forecast(const ForecastArgs& args, std::ostream& out, std::ostream& err);

int cmd_benchmark(const std::string& config_path, const RunOverrides& overrides, std::ostream& out,
                  std::ostream& err);

struct TrainSourceArgs {
    std::string data_path;
    std::string exclude;
    std::size_t n_input = 6;
    std::uint64_t seed = 2021;
    std::string out_path = "source.model";
    TrainOverrides train;
};
int cmd_train_source(const TrainSourceArgs& args, std::ostream& out, std::ostream& err);

struct TransferArgs {
    std::string data_path;
    std::string county;
    std::size_t n_input = 6;
    std::uint64_t seed = 2021;
    std::size_t scarce_threshold = 40;
    std::string out_path = "county.model";
    bool cache = false;
    TrainOverrides train;
};
int cmd_transfer(const TransferArgs& args, std::ostream& out, std::ostream& err);

/// Runs fn and maps library exceptions onto exit codes, printing to err.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn);

}  // namespace declinecast::cli

#include "declinecast/cli_guard.inl"
