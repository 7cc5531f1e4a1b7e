#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "declinecast/errors.hpp"
#include "declinecast/report.hpp"
#include "test_util.hpp"

using namespace declinecast;

namespace {

HarnessConfig quick_harness() {
    HarnessConfig h;
    h.source_cfg.max_epochs = h.head_cfg.max_epochs = 30;
    return h;
}

const Dataset& regime_data() {
    static const Dataset ds = [] {
        Rng rng(7);
        return synth_generate(testutil::two_regime(60, 30, 0.05), rng).data;
    }();
    return ds;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

TEST_CASE("well_mae is positional") {
    const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4};
    CHECK(well_mae(a, b) == 0.0);
    const std::vector<double> shifted{101, 102, 103, 104};
    CHECK(well_mae(shifted, a) == doctest::Approx(100.0).epsilon(1e-15));
    // Same multiset of values, different order: sorted comparison would give 0.
    const std::vector<double> rev{4, 3, 2, 1};
    CHECK(well_mae(rev, a) == 2.0);
    CHECK_THROWS_AS(well_mae(std::vector<double>{1}, a), ConfigError);
}

TEST_CASE("error reduction arithmetic") {
    CHECK(error_reduction(60, 100) == doctest::Approx(0.4));
    CHECK(error_reduction(123.5, 123.5) == 0.0);
    CHECK(error_reduction(0, 0) == 0.0);
    CHECK(error_reduction(150, 100) < 0.0);
    CHECK_THROWS_AS(error_reduction(1, 0), NumericalError);
}

TEST_CASE("overall reduction is the test-count weighted mean") {
    const std::vector<double> r{0.40, 0.20}, n{10, 30};
    CHECK(overall_reduction(r, n) == 0.25);
    CHECK(overall_reduction(std::vector<double>{0.37}, std::vector<double>{12}) == 0.37);
    CHECK(overall_reduction(std::vector<double>{0.1, 0.2, 0.6}, std::vector<double>{5, 5, 5}) ==
          doctest::Approx(0.3).epsilon(1e-15));
    CHECK_THROWS_AS(overall_reduction(r, std::vector<double>{0, 0}), ConfigError);
    CHECK_THROWS_AS(overall_reduction(std::vector<double>{}, std::vector<double>{}), ConfigError);

    Rng rng(99);
    std::uniform_real_distribution<double> red(-2.0, 1.0);
    std::uniform_int_distribution<int> cnt(1, 2000), len(1, 12);
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> rs(static_cast<std::size_t>(len(rng))), ns(rs.size());
        for (std::size_t i = 0; i < rs.size(); ++i) {
            rs[i] = red(rng);
            ns[i] = cnt(rng);
        }
        const double o = overall_reduction(rs, ns);
        CHECK(o >= *std::min_element(rs.begin(), rs.end()));
        CHECK(o <= *std::max_element(rs.begin(), rs.end()));
    }
}

TEST_CASE("Arps benchmark recovers a clean curve and falls back when it must") {
    const ArpsParams truth{20000, 0.8, 0.12};
    const auto series = arps_forecast(truth, 0, 29);
    const std::span<const double> input(series.data(), 6);
    const auto bench = arps_benchmark({18000, 1.0, 0.1}, input, 30, {});
    CHECK_FALSE(bench.fallback);
    REQUIRE(bench.forecast.size() == 24);
    for (std::size_t i = 0; i < 24; ++i) CHECK(testutil::rel_err(bench.forecast[i], series[6 + i]) < 1e-4);

    LmConfig starved;
    starved.max_iterations = 1;
    const std::vector<double> noisy{100, 3, 250, 1, 90, 400};
    const ArpsParams baseline{100, 1.0, 0.1};
    const auto fb = arps_benchmark(baseline, noisy, 20, starved);
    CHECK(fb.fallback);
    CHECK(fb.params == baseline);
}

TEST_CASE("run_trial scores both models on the same test wells") {
    const std::vector<std::string> counties{"Target", "SourceA"};
    const auto h = quick_harness();
    const auto a = run_trial(regime_data(), counties, 6, 42, h);
    const auto b = run_trial(regime_data(), counties, 6, 42, h);
    REQUIRE(a.counties.size() == 2);
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& ca = a.counties[c];
        CHECK(ca.kind == CountyModelKind::transfer_trained);
        CHECK(ca.test_wells == 15);
        CHECK(ca.wells.size() == 15);
        for (std::size_t i = 0; i < ca.wells.size(); ++i) {
            CHECK(ca.wells[i].api_id == b.counties[c].wells[i].api_id);
            CHECK(ca.wells[i].dnn_mae == b.counties[c].wells[i].dnn_mae);
            CHECK(ca.wells[i].arps_mae == b.counties[c].wells[i].arps_mae);
        }
        CHECK(ca.reduction == error_reduction(ca.mean_dnn_mae, ca.mean_arps_mae));
    }
    CHECK(a.overall_reduction == b.overall_reduction);
    REQUIRE(a.counties[0].sample);
    CHECK(a.counties[0].sample->dnn.size() == 24);
    CHECK(a.counties[0].sample->arps.size() == 24);

    const std::vector<std::string> missing{"Nowhere"};
    CHECK_THROWS_AS(run_trial(regime_data(), missing, 6, 1, h), ConfigError);
}

TEST_CASE("66-month series leave a 60-month scoring window at n_input 6") {
    auto cfg = testutil::two_regime(45, 66, 0.05);
    Rng rng(3);
    const auto ds = synth_generate(cfg, rng).data;
    const std::vector<std::string> counties{"Target"};
    const auto t = run_trial(ds, counties, 6, 5, quick_harness());
    REQUIRE(t.counties[0].sample);
    CHECK(t.counties[0].sample->dnn.size() == 60);
    CHECK(t.counties[0].sample->arps.size() == 60);
    CHECK(t.counties[0].sample->actual.size() == 66);
}

TEST_CASE("scarce counties are tested on every well") {
    int kept = 0;
    const auto ds = regime_data().filter(
        [&](const WellRecord& w) { return w.county != "Target" || kept++ < 12; });
    const std::vector<std::string> counties{"Target"};
    const auto t = run_trial(ds, counties, 6, 8, quick_harness());
    CHECK(t.counties[0].kind == CountyModelKind::source_as_is);
    CHECK(t.counties[0].test_wells == 12);
    std::set<std::string> ids;
    for (const auto& w : t.counties[0].wells) ids.insert(w.api_id);
    CHECK(ids.size() == 12);
}

TEST_CASE("aggregation over trials") {
    const std::vector<std::string> counties{"Target"};
    const auto h = quick_harness();
    const auto one = run_trials(regime_data(), counties, 6, 1, 2021, h, 1);
    const auto& t = one.trials.front();
    CHECK(one.aggregate.trials == 1);
    CHECK(one.aggregate.overall_reduction == t.overall_reduction);
    CHECK(one.aggregate.counties[0].mean_dnn_mae == t.counties[0].mean_dnn_mae);
    CHECK(one.aggregate.counties[0].mean_arps_mae == t.counties[0].mean_arps_mae);
    CHECK(one.aggregate.counties[0].mean_reduction == t.counties[0].reduction);
    CHECK(t.seed == trial_seed(2021, 0));

    const auto serial = run_trials(regime_data(), counties, 6, 4, 2021, h, 1);
    const auto parallel = run_trials(regime_data(), counties, 6, 4, 2021, h, 4);
    CHECK(serial.aggregate.trial_overall == parallel.aggregate.trial_overall);
    CHECK(serial.aggregate.overall_reduction == parallel.aggregate.overall_reduction);
    CHECK(serial.trials[0].overall_reduction == one.trials[0].overall_reduction);

    CHECK_THROWS_AS(run_trials(regime_data(), counties, 6, 0, 1, h), ConfigError);
}

TEST_CASE("summary OVERALL rows agree with the county rows") {
    const std::vector<std::string> counties{"Target", "SourceB", "SourceC"};
    auto h = quick_harness();
    std::vector<BenchmarkRun> runs;
    for (std::size_t n : {4, 6}) runs.push_back(run_trials(regime_data(), counties, n, 2, 7, h, 2));
    std::ostringstream out;
    write_summary_csv(out, runs);

    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == kSummaryHeader);
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_n;
    int overall_rows = 0;
    while (std::getline(in, line)) {
        const auto cells = split_csv(line);
        REQUIRE(cells.size() == 6);
        auto& [red, cnt] = per_n[cells[1]];
        if (cells[0] == kOverallLabel) {
            ++overall_rows;
            CHECK(std::abs(parse_double(cells[4]) - overall_reduction(red, cnt)) <= 1e-12);
        } else {
            red.push_back(parse_double(cells[4]));
            cnt.push_back(parse_double(cells[5]));
        }
    }
    CHECK(overall_rows == 2);
}

TEST_CASE("SVG output structure") {
    SampleForecast s{"W&1", 3, {10, 9, 8, 7, 6}, {7.5, 6.5}, {7.2, 6.1}};
    const auto svg = forecast_svg(s, "County <A>");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("class=\"input-region\"") != std::string::npos);
    CHECK(svg.find("class=\"actual\"") != std::string::npos);
    CHECK(svg.find("class=\"dnn\"") != std::string::npos);
    CHECK(svg.find("class=\"arps\"") != std::string::npos);
    CHECK(svg.find("data-values=\"7.5 6.5\"") != std::string::npos);
    CHECK(svg.find("County &lt;A&gt;") != std::string::npos);
    CHECK(svg.find("W&amp;1") != std::string::npos);
    CHECK(forecast_svg(s, "County <A>") == svg);

    AggregateReport agg;
    agg.n_input = 6;
    agg.trials = 3;
    agg.counties = {{"Hill", 1, 2, 0.47, 10}, {"Wise", 1, 2, -0.1, 5}};
    agg.overall_reduction = 0.28;
    const auto bars = reduction_bar_svg(agg, "n=6");
    CHECK(std::count(bars.begin(), bars.end(), '\n') > 5);
    CHECK(bars.find("data-county=\"Hill\" data-reduction=\"0.47\"") != std::string::npos);
    CHECK(bars.find("data-county=\"Wise\" data-reduction=\"-0.1\"") != std::string::npos);
    CHECK(bars.find("data-county=\"OVERALL\" data-reduction=\"0.28\"") != std::string::npos);
}

TEST_CASE("emit_report writes the expected files") {
    const std::vector<std::string> counties{"Target"};
    std::vector<BenchmarkRun> runs{run_trials(regime_data(), counties, 6, 1, 3, quick_harness(), 1)};
    const auto dir = std::filesystem::temp_directory_path() / "declinecast_report_test";
    std::filesystem::remove_all(dir);
    emit_report(runs, dir);
    CHECK(std::filesystem::exists(dir / "summary.csv"));
    CHECK(std::filesystem::exists(dir / "trials.csv"));
    CHECK(std::filesystem::exists(dir / "plots" / "forecast_Target_n6.svg"));
    CHECK(std::filesystem::exists(dir / "plots" / "reduction_n6.svg"));
    std::filesystem::remove_all(dir);
}
