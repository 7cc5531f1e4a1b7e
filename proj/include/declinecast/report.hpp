#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "declinecast/evaluate.hpp"

namespace declinecast {

/// "%.6g"
std::string format_sig6(double v);

inline constexpr const char* kSummaryHeader =
    "county,n_input,mean_dnn_mae,mean_arps_mae,reduction,test_wells";
inline constexpr const char* kOverallLabel = "OVERALL";

void write_summary_csv(std::ostream& out, std::span<const BenchmarkRun> runs);
void write_trials_csv(std::ostream& out, std::span<const BenchmarkRun> runs);

std::string forecast_svg(const SampleForecast& s, const std::string& title);
std::string reduction_bar_svg(const AggregateReport& agg, const std::string& title);

/// summary.csv, trials.csv, one forecast plot per county and n_input
/// (plots/forecast_<county>_n<k>.svg) and one bar chart per n_input
/// (plots/reduction_n<k>.svg).
void emit_report(std::span<const BenchmarkRun> runs, const std::filesystem::path& out_dir);

}  // namespace declinecast
