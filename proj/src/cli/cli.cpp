#include "declinecast/cli.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "declinecast/errors.hpp"
#include "declinecast/nn/model_io.hpp"
#include "declinecast/report.hpp"
#include "declinecast/transfer.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace declinecast::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(t);
    return out;
}

template <typename T>
T parse_value(const std::string& section, const std::string& key, const std::string& raw) {
    std::istringstream ss(raw);
    T v{};
    if constexpr (std::is_same_v<T, bool>) {
        std::string w;
        ss >> w;
        if (w == "true" || w == "1" || w == "yes") return true;
        if (w == "false" || w == "0" || w == "no") return false;
        throw ConfigError("[" + section + "] " + key + ": expected true/false, got '" + raw + "'");
    } else {
        if (!(ss >> v) || !(ss >> std::ws).eof())
            throw ConfigError("[" + section + "] " + key + ": invalid value '" + raw + "'");
        if constexpr (std::is_unsigned_v<T>)
            if (raw.find('-') != std::string::npos)
                throw ConfigError("[" + section + "] " + key + ": must be non-negative");
        return v;
    }
}

pt::ptree read_ini(const std::filesystem::path& path) {
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("cannot parse ") + path.string() + ": " + e.what());
    }
    return tree;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base.parent_path() / q;
}

void check_keys(const std::string& section, const pt::ptree& node,
                std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : node)
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
}

}  // namespace

void TrainOverrides::apply(nn::TrainConfig& cfg) const {
    if (max_epochs) cfg.max_epochs = *max_epochs;
    if (patience) cfg.patience = *patience;
    if (batch_size) cfg.batch_size = *batch_size;
    if (learning_rate) cfg.adam.learning_rate = *learning_rate;
}

void RunConfig::validate(std::size_t months) const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (n_inputs.empty()) throw ConfigError("n_input list is empty");
    for (auto n : n_inputs)
        if (n < 3 || n >= months)
            throw ConfigError("n_input " + std::to_string(n) + " must lie in [3, " +
                              std::to_string(months) + ")");
    if (scarce_threshold != 0 && scarce_threshold < 4)
        throw ConfigError("scarce_threshold must be 0 or >= 4");
    train.validate();
}

RunConfig read_run_config(const std::filesystem::path& path) {
    const auto tree = read_ini(path);
    RunConfig cfg;
    for (const auto& [section, node] : tree) {
        if (section == "data") {
            check_keys(section, node, {"path", "synth", "counties"});
            for (const auto& [key, v] : node) {
                const auto raw = v.get_value<std::string>();
                if (key == "path") cfg.data_path = resolve(path, raw);
                else if (key == "synth") cfg.synth_path = resolve(path, raw);
                else cfg.counties = split_list(raw);
            }
        } else if (section == "run") {
            check_keys(section, node,
                       {"n_input", "trials", "seed", "scarce_threshold", "out_dir", "jobs", "cache"});
            for (const auto& [key, v] : node) {
                const auto raw = v.get_value<std::string>();
                if (key == "n_input") {
                    cfg.n_inputs.clear();
                    for (const auto& item : split_list(raw))
                        cfg.n_inputs.push_back(parse_value<std::size_t>(section, key, item));
                } else if (key == "trials") cfg.trials = parse_value<std::size_t>(section, key, raw);
                else if (key == "seed") cfg.seed = parse_value<std::uint64_t>(section, key, raw);
                else if (key == "scarce_threshold") cfg.scarce_threshold = parse_value<std::size_t>(section, key, raw);
                else if (key == "out_dir") cfg.out_dir = resolve(path, raw);
                else if (key == "jobs") cfg.jobs = parse_value<int>(section, key, raw);
                else cfg.cache = parse_value<bool>(section, key, raw);
            }
        } else if (section == "train") {
            check_keys(section, node,
                       {"max_epochs", "patience", "batch_size", "learning_rate", "beta1", "beta2", "epsilon"});
            for (const auto& [key, v] : node) {
                const auto raw = v.get_value<std::string>();
                if (key == "max_epochs") cfg.train.max_epochs = parse_value<int>(section, key, raw);
                else if (key == "patience") cfg.train.patience = parse_value<int>(section, key, raw);
                else if (key == "batch_size") cfg.train.batch_size = parse_value<std::size_t>(section, key, raw);
                else if (key == "learning_rate") cfg.train.adam.learning_rate = parse_value<double>(section, key, raw);
                else if (key == "beta1") cfg.train.adam.beta1 = parse_value<double>(section, key, raw);
                else if (key == "beta2") cfg.train.adam.beta2 = parse_value<double>(section, key, raw);
                else cfg.train.adam.epsilon = parse_value<double>(section, key, raw);
            }
        } else {
            throw ConfigError("unknown section [" + section + "] in " + path.string());
        }
    }
    if (cfg.data_path.empty() == cfg.synth_path.empty())
        throw ConfigError("[data] needs exactly one of 'path' or 'synth'");
    return cfg;
}

SynthFile read_synth_config(const std::filesystem::path& path) {
    const auto tree = read_ini(path);
    SynthFile f;
    bool have_synth = false;
    for (const auto& [section, node] : tree) {
        if (section == "synth") {
            have_synth = true;
            check_keys(section, node, {"seed", "months", "wells_per_county", "noise", "state"});
            for (const auto& [key, v] : node) {
                const auto raw = v.get_value<std::string>();
                if (key == "seed") f.seed = parse_value<std::uint64_t>(section, key, raw);
                else if (key == "months") f.config.months = parse_value<std::size_t>(section, key, raw);
                else if (key == "wells_per_county") f.config.wells_per_county = parse_value<std::size_t>(section, key, raw);
                else if (key == "noise") f.config.noise = parse_value<double>(section, key, raw);
                else f.config.state = trim(raw);
            }
        } else if (section.rfind("county.", 0) == 0) {
            CountySynth c{section.substr(7), 0, 0, 0, 0, 0, 0, 0};
            check_keys(section, node, {"qi_min", "qi_max", "b_min", "b_max", "di_min", "di_max", "wells"});
            for (const char* k : {"qi_min", "qi_max", "b_min", "b_max", "di_min", "di_max"})
                if (!node.get_child_optional(k))
                    throw ConfigError("[" + section + "] is missing '" + k + "'");
            auto get = [&](const char* k) { return parse_value<double>(section, k, node.get<std::string>(k)); };
            c.qi_min = get("qi_min");
            c.qi_max = get("qi_max");
            c.b_min = get("b_min");
            c.b_max = get("b_max");
            c.di_min = get("di_min");
            c.di_max = get("di_max");
            if (node.get_child_optional("wells"))
                c.wells = parse_value<std::size_t>(section, "wells", node.get<std::string>("wells"));
            f.config.counties.push_back(std::move(c));
        } else {
            throw ConfigError("unknown section [" + section + "] in " + path.string());
        }
    }
    if (!have_synth) throw ConfigError(path.string() + " has no [synth] section");
    f.config.validate();
    return f;
}

Dataset load_run_data(const RunConfig& cfg) {
    if (!cfg.data_path.empty()) return load_csv(cfg.data_path.string());
    const auto synth = read_synth_config(cfg.synth_path);
    Rng rng(synth.seed);
    return synth_generate(synth.config, rng).data;
}

std::filesystem::path truth_path_for(const std::filesystem::path& out_csv) {
    auto p = out_csv;
    if (p.extension() == ".csv") p.replace_extension();
    p += ".truth.csv";
    return p;
}

int default_jobs() {
#ifdef _OPENMP
    return omp_get_num_procs();
#else
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
#endif
}

int cmd_ingest(const std::string& csv_path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto ds = load_csv(csv_path);
        const auto counts = county_counts(ds);
        out << ds.size() << " wells, " << ds.months() << " months, " << counts.size() << " counties\n";
        std::vector<std::pair<std::string, std::size_t>> rows(counts.begin(), counts.end());
        std::stable_sort(rows.begin(), rows.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        for (const auto& [county, n] : rows) out << county << ": " << n << '\n';
        return kOk;
    });
}

int cmd_synth(const std::string& config_path, const std::string& out_path, std::ostream& out,
              std::ostream& err) {
    return guarded(err, [&] {
        const auto f = read_synth_config(config_path);
        Rng rng(f.seed);
        const auto res = synth_generate(f.config, rng);
        save_csv(out_path, res.data);
        const auto truth = truth_path_for(out_path);
        std::ofstream t(truth);
        if (!t) throw ConfigError("cannot write " + truth.string());
        write_truth_csv(t, res.truth);
        out << "wrote " << res.data.size() << " wells x " << res.data.months() << " months to "
            << out_path << " (truth: " << truth.string() << ")\n";
        return kOk;
    });
}

int cmd_forecast(const ForecastArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto model = nn::load_model(args.model_path);
        if (!model.scaler) throw nn::ModelFormatError(args.model_path + ": model file has no scaler");
        if (model.n_input != args.n_input)
            throw ConfigError("model " + args.model_path + " was trained on " + std::to_string(model.n_input) +
                              " input months but " + std::to_string(args.n_input) +
                              " were requested; each input window length needs its own model");
        const auto wells = load_csv(args.wells_path);
        if (wells.months() < args.n_input)
            throw DataError("well file has fewer than " + std::to_string(args.n_input) + " months");
        std::optional<ArpsParams> baseline;
        if (!args.arps_params_path.empty()) baseline = load_params(args.arps_params_path);

        const std::size_t horizon = model.n_input + model.m_output;
        if (const auto parent = std::filesystem::path(args.out_path).parent_path(); !parent.empty())
            std::filesystem::create_directories(parent);
        std::ofstream csv(args.out_path);
        if (!csv) throw ConfigError("cannot write " + args.out_path);
        csv << "Well-API,Model";
        for (std::size_t m = model.n_input; m < horizon; ++m) csv << ",Month-" << (m + 1);
        csv << '\n';

        std::filesystem::path plot_dir =
            args.plot_dir.empty() ? std::filesystem::path(args.out_path).parent_path()
                                  : std::filesystem::path(args.plot_dir);
        if (!plot_dir.empty()) std::filesystem::create_directories(plot_dir);

        std::size_t fallbacks = 0;
        for (const auto& w : wells.wells()) {
            const std::span<const double> input(w.production.data(), args.n_input);
            SampleForecast s{w.api_id, args.n_input, w.production, nn::predict(model, input), {}};
            csv << w.api_id << ",dnn";
            for (double v : s.dnn) csv << ',' << format_sig6(v);
            csv << '\n';
            if (baseline) {
                const auto bench = arps_benchmark(*baseline, input, horizon, LmConfig{});
                fallbacks += bench.fallback ? 1 : 0;
                s.arps = bench.forecast;
                csv << w.api_id << ",arps";
                for (double v : s.arps) csv << ',' << format_sig6(v);
                csv << '\n';
            }
            std::string name;
            for (char c : w.api_id) name += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
            std::ofstream svg(plot_dir / ("forecast_" + name + ".svg"));
            svg << forecast_svg(s, "Well " + w.api_id + ", " + std::to_string(args.n_input) + " input months");
        }
        out << "forecast " << wells.size() << " wells x " << model.m_output << " months -> " << args.out_path;
        if (baseline) out << " (lm_fallbacks " << fallbacks << ")";
        out << '\n';
        return kOk;
    });
}

int cmd_benchmark(const std::string& config_path, const RunOverrides& ov, std::ostream& out,
                  std::ostream& err) {
    return guarded(err, [&] {
        RunConfig cfg = read_run_config(config_path);
        if (ov.n_inputs) cfg.n_inputs = *ov.n_inputs;
        if (ov.counties) cfg.counties = *ov.counties;
        if (ov.trials) cfg.trials = *ov.trials;
        if (ov.seed) cfg.seed = *ov.seed;
        if (ov.scarce_threshold) cfg.scarce_threshold = *ov.scarce_threshold;
        if (ov.out_dir) cfg.out_dir = *ov.out_dir;
        if (ov.jobs) cfg.jobs = *ov.jobs;
        if (ov.cache) cfg.cache = true;
        ov.train.apply(cfg.train);

        const Dataset full = load_run_data(cfg);
        cfg.validate(full.months());
        const auto counties = cfg.counties.empty() ? county_names(full) : cfg.counties;
        check_counties(full, counties);

        std::optional<SourceCache> cache;
        if (cfg.cache) cache.emplace(default_cache_dir());
        HarnessConfig h;
        h.scarce_threshold = cfg.scarce_threshold;
        h.source_cfg = cfg.train;
        h.head_cfg = cfg.train;
        h.cache = cache ? &*cache : nullptr;
        const int jobs = cfg.jobs > 0 ? cfg.jobs : default_jobs();

        std::vector<BenchmarkRun> runs;
        for (auto n : cfg.n_inputs) {
            err << "benchmark: n_input " << n << ", " << cfg.trials << " trials, " << counties.size()
                << " counties, " << jobs << " jobs\n";
            runs.push_back(run_trials(full, counties, n, cfg.trials, cfg.seed, h, jobs));
        }
        emit_report(runs, cfg.out_dir);
        for (const auto& r : runs)
            out << "n_input " << r.aggregate.n_input << ": overall error reduction "
                << format_sig6(100.0 * r.aggregate.overall_reduction) << "%\n";
        return kOk;
    });
}

int cmd_train_source(const TrainSourceArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto full = load_csv(args.data_path);
        nn::TrainConfig cfg;
        args.train.apply(cfg);
        const auto res = train_source(full, args.exclude, args.n_input, cfg, args.seed);
        nn::save_model(res.model, args.out_path);
        out << "source model: " << full.excluding_county(args.exclude).size() << " wells, "
            << res.history.epochs() << " epochs, best epoch " << res.history.best_epoch
            << ", validation MAE " << format_sig6(res.history.val_loss[res.history.best_epoch - 1])
            << " -> " << args.out_path << '\n';
        return kOk;
    });
}

int cmd_transfer(const TransferArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto full = load_csv(args.data_path);
        TransferPlan plan;
        plan.target_county = args.county;
        plan.n_input = args.n_input;
        plan.scarce_threshold = args.scarce_threshold;
        args.train.apply(plan.source_cfg);
        args.train.apply(plan.head_cfg);
        std::optional<SourceCache> cache;
        if (args.cache) cache.emplace(default_cache_dir());
        const auto cm = county_model(full, plan, args.seed, cache ? &*cache : nullptr);
        nn::save_model(cm.model, args.out_path);
        out << args.county << ": " << to_string(cm.kind) << ", " << cm.county_train.size()
            << " training wells, " << cm.test.size() << " test wells -> " << args.out_path << '\n';
        return kOk;
    });
}

}  // namespace declinecast::cli
