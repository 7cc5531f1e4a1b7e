// declinecast: decline-curve benchmark and county transfer-learning forecasts.

#include <CLI11.hpp>
#include <iostream>

#include "declinecast/cli.hpp"

using namespace declinecast;

namespace {

void add_train_flags(CLI::App* cmd, cli::TrainOverrides& t) {
    cmd->add_option("--max-epochs", t.max_epochs, "Epoch budget per training run (default 200)");
    cmd->add_option("--patience", t.patience, "Early-stopping patience in epochs, 0 disables (default 10)");
    cmd->add_option("--batch-size", t.batch_size, "Mini-batch size (default 32)");
    cmd->add_option("--learning-rate", t.learning_rate, "Adam learning rate (default 0.001)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"declinecast - Arps decline curves vs transfer-learned county forecast networks",
                 "declinecast"};
    app.require_subcommand(1);

    std::string ingest_path;
    auto* ingest = app.add_subcommand("ingest", "Validate a production CSV and print county counts");
    ingest->add_option("csv", ingest_path, "Production CSV (Well-API,County,State,Month-1..N)")->required();

    std::string synth_cfg, synth_out = "synthetic.csv";
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset plus its truth file");
    synth->add_option("config", synth_cfg, "Synthetic-data configuration file")->required();
    synth->add_option("-o,--out", synth_out, "Output CSV; truth goes to <name>.truth.csv")->capture_default_str();

    cli::ForecastArgs fc;
    auto* forecast = app.add_subcommand("forecast", "Forecast wells with a saved model");
    forecast->add_option("-m,--model", fc.model_path, "Model file")->required();
    forecast->add_option("-w,--wells", fc.wells_path, "CSV with the wells to forecast")->required();
    forecast->add_option("-n,--n-input", fc.n_input, "Input months; must match the model")->required();
    forecast->add_option("--arps", fc.arps_params_path, "Arps baseline parameter file (qi=, b=, di=)");
    forecast->add_option("-o,--out", fc.out_path, "Forecast CSV")->capture_default_str();
    forecast->add_option("--plot-dir", fc.plot_dir, "Directory for SVG plots (default: beside --out)");

    std::string bench_cfg;
    cli::RunOverrides ov;
    std::vector<std::size_t> n_inputs;
    std::vector<std::string> counties;
    std::size_t trials = 0, threshold = 0;
    std::uint64_t seed = 0;
    std::string out_dir;
    int jobs = 0;
    auto* bench = app.add_subcommand("benchmark", "Run the repeated-trial DNN vs Arps comparison");
    bench->add_option("config", bench_cfg, "Run configuration file")->required();
    auto* o_n = bench->add_option("--n-input", n_inputs, "Input month counts (default 4 6 8 10)")->delimiter(',');
    auto* o_c = bench->add_option("--counties", counties, "Counties to evaluate (default: all)")->delimiter(',');
    auto* o_k = bench->add_option("-k,--trials", trials, "Number of shuffled trials (default 100)");
    auto* o_s = bench->add_option("--seed", seed, "Master seed (default 2021)");
    auto* o_t = bench->add_option("--scarce-threshold", threshold,
                                  "Minimum county wells to train a transfer head (default 40)");
    auto* o_o = bench->add_option("--out", out_dir, "Report directory (default report)");
    auto* o_j = bench->add_option("-j,--jobs", jobs, "Parallel trials, 0 = all processors (default 0)");
    bench->add_flag("--cache", ov.cache, "Reuse cached source models ($DECLINECAST_CACHE or ./cache)");
    add_train_flags(bench, ov.train);

    cli::TrainSourceArgs ts;
    auto* train_source = app.add_subcommand("train-source", "Train a source model excluding one county");
    train_source->add_option("-d,--data", ts.data_path, "Production CSV")->required();
    train_source->add_option("-x,--exclude", ts.exclude, "County left out of the source pool")->required();
    train_source->add_option("-n,--n-input", ts.n_input, "Input months")->capture_default_str();
    train_source->add_option("--seed", ts.seed, "Seed")->capture_default_str();
    train_source->add_option("-o,--out", ts.out_path, "Model output file")->capture_default_str();
    add_train_flags(train_source, ts.train);

    cli::TransferArgs tr;
    auto* transfer = app.add_subcommand("transfer", "Build a county model (transfer head or scarce fallback)");
    transfer->add_option("-d,--data", tr.data_path, "Production CSV")->required();
    transfer->add_option("-c,--county", tr.county, "Target county")->required();
    transfer->add_option("-n,--n-input", tr.n_input, "Input months")->capture_default_str();
    transfer->add_option("--seed", tr.seed, "Seed")->capture_default_str();
    transfer->add_option("--scarce-threshold", tr.scarce_threshold, "Minimum wells to train a head")->capture_default_str();
    transfer->add_option("-o,--out", tr.out_path, "Model output file")->capture_default_str();
    transfer->add_flag("--cache", tr.cache, "Reuse cached source models");
    add_train_flags(transfer, tr.train);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? cli::kOk : cli::kUsage;
    }

    if (*ingest) return cli::cmd_ingest(ingest_path, std::cout, std::cerr);
    if (*synth) return cli::cmd_synth(synth_cfg, synth_out, std::cout, std::cerr);
    if (*forecast) return cli::cmd_forecast(fc, std::cout, std::cerr);
    if (*bench) {
        if (*o_n) ov.n_inputs = n_inputs;
        if (*o_c) ov.counties = counties;
        if (*o_k) ov.trials = trials;
        if (*o_s) ov.seed = seed;
        if (*o_t) ov.scarce_threshold = threshold;
        if (*o_o) ov.out_dir = out_dir;
        if (*o_j) ov.jobs = jobs;
        return cli::cmd_benchmark(bench_cfg, ov, std::cout, std::cerr);
    }
    if (*train_source) return cli::cmd_train_source(ts, std::cout, std::cerr);
    if (*transfer) return cli::cmd_transfer(tr, std::cout, std::cerr);
    return cli::kUsage;
}
