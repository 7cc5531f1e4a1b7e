#include "declinecast/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <unordered_set>

#include "declinecast/errors.hpp"
#include "declinecast/nn/network.hpp"

namespace declinecast {

double well_mae(std::span<const double> forecast, std::span<const double> actual) {
    if (forecast.size() != actual.size() || forecast.empty())
        throw ConfigError("well_mae needs equal, non-zero lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < forecast.size(); ++i) s += std::abs(forecast[i] - actual[i]);
    return s / static_cast<double>(forecast.size());
}

double error_reduction(double mean_dnn_mae, double mean_arps_mae) {
    if (mean_arps_mae > 0.0) return 1.0 - mean_dnn_mae / mean_arps_mae;
    if (mean_dnn_mae == 0.0) return 0.0;
    throw NumericalError("error reduction undefined: Arps MAE is zero but DNN MAE is not");
}

double overall_reduction(std::span<const double> reductions, std::span<const double> test_counts) {
    if (reductions.size() != test_counts.size() || reductions.empty())
        throw ConfigError("overall_reduction needs one count per county");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < reductions.size(); ++i) {
        if (!(test_counts[i] > 0.0)) throw ConfigError("test well counts must be > 0");
        num += reductions[i] * test_counts[i];
        den += test_counts[i];
    }
    // The exact weighted mean lies in [min, max]; clamping only removes rounding.
    const auto [lo, hi] = std::minmax_element(reductions.begin(), reductions.end());
    return std::clamp(num / den, *lo, *hi);
}

ArpsBenchmark arps_benchmark(const ArpsParams& baseline, std::span<const double> input,
                             std::size_t months, const LmConfig& lm) {
    ArpsBenchmark out;
    auto attempt = [&](const ArpsParams& init) -> std::optional<ArpsParams> {
        try {
            auto r = lm_fit(input, init, lm);
            if (r.converged()) return r.params;
        } catch (const DataError&) {
        } catch (const NumericalError&) {
        }
        return std::nullopt;
    };
    auto p = attempt(baseline);
    if (!p) p = attempt(default_init(input));
    if (p) {
        out.params = *p;
    } else {
        out.params = baseline;
        out.fallback = true;
    }
    out.forecast = arps_forecast(out.params, input.size(), months - 1);
    return out;
}

namespace {

double stddev(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

CountyTrial score_county(const Dataset& full, const std::string& county, std::size_t n_input,
                         std::uint64_t seed, const HarnessConfig& cfg) {
    TransferPlan plan;
    plan.target_county = county;
    plan.n_input = n_input;
    plan.scarce_threshold = cfg.scarce_threshold;
    plan.source_cfg = cfg.source_cfg;
    plan.head_cfg = cfg.head_cfg;
    plan.arch = cfg.arch;
    const CountyModel cm = county_model(full, plan, seed, cfg.cache);

    if (cm.test.empty()) throw NumericalError("county '" + county + "' has an empty test split");
    std::unordered_set<std::string> seen;
    for (const auto& w : cm.source_pool.wells()) seen.insert(w.api_id);
    for (const auto& w : cm.county_train.wells()) seen.insert(w.api_id);
    for (const auto& w : cm.test.wells())
        if (seen.count(w.api_id))
            throw NumericalError("test well " + w.api_id + " leaked into a training pool");

    // The scarce path has no county training split, so the benchmark baseline
    // is fitted on the county's full well set.
    const Dataset& baseline_pool =
        cm.kind == CountyModelKind::source_as_is ? cm.test : cm.county_train;
    const ArpsParams baseline = county_baseline_fit(baseline_pool, cfg.lm).params;

    CountyTrial ct;
    ct.county = county;
    ct.kind = cm.kind;
    ct.test_wells = cm.test.size();
    std::vector<double> dnn, arps;
    for (std::size_t i = 0; i < cm.test.size(); ++i) {
        const auto& w = cm.test[i];
        const auto win = window(w, n_input);
        const auto dnn_fc = nn::predict(cm.model, win.input);
        const auto bench = arps_benchmark(baseline, win.input, full.months(), cfg.lm);
        WellResult r{w.api_id, w.county, well_mae(dnn_fc, win.label), well_mae(bench.forecast, win.label),
                     bench.fallback};
        dnn.push_back(r.dnn_mae);
        arps.push_back(r.arps_mae);
        ct.lm_fallbacks += r.lm_fallback ? 1 : 0;
        ct.wells.push_back(std::move(r));
        if (i == 0 && cfg.keep_samples)
            ct.sample = SampleForecast{w.api_id, n_input, w.production, dnn_fc, bench.forecast};
    }
    const double n = static_cast<double>(dnn.size());
    ct.mean_dnn_mae = std::accumulate(dnn.begin(), dnn.end(), 0.0) / n;
    ct.mean_arps_mae = std::accumulate(arps.begin(), arps.end(), 0.0) / n;
    ct.sd_dnn_mae = stddev(dnn, ct.mean_dnn_mae);
    ct.sd_arps_mae = stddev(arps, ct.mean_arps_mae);
    ct.reduction = error_reduction(ct.mean_dnn_mae, ct.mean_arps_mae);
    return ct;
}

}  // namespace

void check_counties(const Dataset& full, std::span<const std::string> counties) {
    if (counties.empty()) throw ConfigError("no counties selected");
    for (const auto& c : counties)
        if (!full.has_county(c)) throw ConfigError("county '" + c + "' is not in the dataset");
}

TrialReport run_trial(const Dataset& full, std::span<const std::string> counties, std::size_t n_input,
                      std::uint64_t seed, const HarnessConfig& cfg) {
    check_counties(full, counties);
    if (n_input < 1 || n_input >= full.months()) throw ConfigError("n_input must lie in [1, months)");
    TrialReport rep;
    rep.seed = seed;
    rep.n_input = n_input;
    std::vector<double> reductions, counts;
    for (const auto& c : counties) {
        rep.counties.push_back(score_county(full, c, n_input, derive_seed(seed, c), cfg));
        reductions.push_back(rep.counties.back().reduction);
        counts.push_back(static_cast<double>(rep.counties.back().test_wells));
    }
    rep.overall_reduction = overall_reduction(reductions, counts);
    return rep;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) {
    return derive_seed(master_seed, static_cast<std::uint64_t>(trial));
}

AggregateReport aggregate(std::span<const TrialReport> trials) {
    if (trials.empty()) throw ConfigError("nothing to aggregate");
    AggregateReport agg;
    agg.n_input = trials.front().n_input;
    agg.trials = trials.size();
    const double k = static_cast<double>(trials.size());
    for (const auto& c : trials.front().counties) agg.counties.push_back({c.county});
    for (const auto& t : trials) {
        if (t.counties.size() != agg.counties.size()) throw ConfigError("trials cover different counties");
        for (std::size_t i = 0; i < t.counties.size(); ++i) {
            auto& a = agg.counties[i];
            const auto& c = t.counties[i];
            a.mean_dnn_mae += c.mean_dnn_mae;
            a.mean_arps_mae += c.mean_arps_mae;
            a.mean_reduction += c.reduction;
            a.test_wells += static_cast<double>(c.test_wells);
        }
        agg.trial_overall.push_back(t.overall_reduction);
    }
    std::vector<double> reductions, counts;
    for (auto& a : agg.counties) {
        a.mean_dnn_mae /= k;
        a.mean_arps_mae /= k;
        a.mean_reduction /= k;
        a.test_wells /= k;
        reductions.push_back(a.mean_reduction);
        counts.push_back(a.test_wells);
    }
    agg.overall_reduction = overall_reduction(reductions, counts);
    return agg;
}

BenchmarkRun run_trials(const Dataset& full, std::span<const std::string> counties,
                        std::size_t n_input, std::size_t k, std::uint64_t master_seed,
                        const HarnessConfig& cfg, int jobs) {
    if (k < 1) throw ConfigError("trial count must be >= 1");
    check_counties(full, counties);
    std::vector<TrialReport> trials(k);
    std::vector<std::exception_ptr> errors(k);
    const long n = static_cast<long>(k);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(jobs, 1))
    for (long i = 0; i < n; ++i) {
        try {
            const auto idx = static_cast<std::size_t>(i);
            HarnessConfig c = cfg;
            c.keep_samples = cfg.keep_samples && idx == 0;
            trials[idx] = run_trial(full, counties, n_input, trial_seed(master_seed, idx), c);
            trials[idx].trial = idx;
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    BenchmarkRun run;
    run.aggregate = aggregate(trials);
    run.trials = std::move(trials);
    return run;
}

}  // namespace declinecast
