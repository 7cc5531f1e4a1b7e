#include "declinecast/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "declinecast/errors.hpp"

namespace declinecast {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}


Dataset subset(const std::vector<WellRecord>& wells, std::span<const std::size_t> idx,
               std::size_t months) {
    std::vector<WellRecord> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(wells[i]);
    return Dataset(std::move(out), months);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (!s.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || s.empty())
        throw DataError("not a number: '" + std::string(s) + "'");
    return v;
}

Dataset::Dataset(std::vector<WellRecord> wells, std::size_t months)
    : wells_(std::move(wells)), months_(months) {
    std::unordered_set<std::string> ids;
    for (const auto& w : wells_) {
        if (w.production.size() != months_)
            throw DataError("well " + w.api_id + " has " + std::to_string(w.production.size()) +
                            " months, expected " + std::to_string(months_));
        if (w.county.empty()) throw DataError("well " + w.api_id + " has an empty county");
        if (!ids.insert(w.api_id).second) throw DataError("duplicate Well-API " + w.api_id);
        for (std::size_t m = 0; m < w.production.size(); ++m) {
            const double v = w.production[m];
            if (!std::isfinite(v) || v < 0.0)
                throw DataError("well " + w.api_id + " month " + std::to_string(m + 1) +
                                ": production must be finite and non-negative");
        }
    }
}

Dataset Dataset::filter(const std::function<bool(const WellRecord&)>& keep) const {
    std::vector<WellRecord> out;
    for (const auto& w : wells_)
        if (keep(w)) out.push_back(w);
    return Dataset(std::move(out), months_);
}

Dataset Dataset::county(const std::string& name) const {
    return filter([&](const WellRecord& w) { return w.county == name; });
}

Dataset Dataset::excluding_county(const std::string& name) const {
    return filter([&](const WellRecord& w) { return w.county != name; });
}

bool Dataset::has_county(const std::string& name) const {
    return std::any_of(wells_.begin(), wells_.end(),
                       [&](const WellRecord& w) { return w.county == name; });
}

std::uint64_t Dataset::content_hash() const {
    std::uint64_t h = fnv1a(std::to_string(months_));
    for (const auto& w : wells_) {
        h = fnv1a(w.api_id, h);
        h = fnv1a("\x1f", h);
        h = fnv1a(w.county, h);
        h = fnv1a("\x1f", h);
        h = fnv1a(w.state, h);
        for (double v : w.production) {
            const auto bits = std::bit_cast<std::uint64_t>(v);
            h = mix64(h ^ bits);
        }
    }
    return h;
}

Dataset read_csv(std::istream& in, std::optional<std::size_t> expected_months) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("missing header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = split_fields(line);
    if (header.size() < 3 || header[0] != "Well-API" || header[1] != "County" ||
        header[2] != "State") {
        std::set<std::string_view> seen;
        for (auto h : header)
            if (!seen.insert(h).second)
                throw DataError("duplicate header column '" + std::string(h) + "'");
        throw DataError("header must start with Well-API,County,State");
    }
    const std::size_t months = header.size() - 3;
    for (std::size_t m = 0; m < months; ++m) {
        const std::string expected = "Month-" + std::to_string(m + 1);
        if (header[3 + m] != expected) {
            if (std::find(header.begin(), header.begin() + 3 + m, header[3 + m]) !=
                header.begin() + 3 + m)
                throw DataError("duplicate header column '" + std::string(header[3 + m]) + "'");
            throw DataError("header column " + std::to_string(4 + m) + " is '" +
                            std::string(header[3 + m]) + "', expected '" + expected + "'");
        }
    }
    if (months < 5) throw DataError("need at least 5 month columns, found " + std::to_string(months));
    if (expected_months && *expected_months != months)
        throw DataError("expected " + std::to_string(*expected_months) + " months, found " +
                        std::to_string(months));

    std::vector<WellRecord> wells;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, found " +
                            std::to_string(fields.size()));
        WellRecord w;
        w.api_id = std::string(fields[0]);
        w.county = std::string(fields[1]);
        w.state = std::string(fields[2]);
        if (w.api_id.empty()) throw DataError("line " + std::to_string(line_no) + ": empty Well-API");
        if (w.county.empty()) throw DataError("line " + std::to_string(line_no) + ": empty County");
        if (!ids.insert(w.api_id).second)
            throw DataError("line " + std::to_string(line_no) + ": duplicate Well-API " + w.api_id);
        w.production.reserve(months);
        for (std::size_t m = 0; m < months; ++m) {
            const auto cell = fields[3 + m];
            const auto where = "line " + std::to_string(line_no) + ", column Month-" +
                               std::to_string(m + 1) + ": ";
            double v = 0.0;
            try {
                v = parse_double(cell);
            } catch (const DataError&) {
                throw DataError(where + "non-numeric production '" + std::string(cell) + "'");
            }
            if (!std::isfinite(v)) throw DataError(where + "non-finite production");
            if (v < 0.0) throw DataError(where + "negative production '" + std::string(cell) + "'");
            w.production.push_back(v);
        }
        wells.push_back(std::move(w));
    }
    return Dataset(std::move(wells), months);
}

Dataset load_csv(const std::string& path, std::optional<std::size_t> expected_months) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return read_csv(in, expected_months);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_csv(std::ostream& out, const Dataset& ds) {
    out << "Well-API,County,State";
    for (std::size_t m = 0; m < ds.months(); ++m) out << ",Month-" << (m + 1);
    out << '\n';
    for (const auto& w : ds.wells()) {
        out << w.api_id << ',' << w.county << ',' << w.state;
        for (double v : w.production) out << ',' << format_double(v);
        out << '\n';
    }
}

void save_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    write_csv(out, ds);
}

std::map<std::string, std::size_t> county_counts(const Dataset& ds) {
    std::map<std::string, std::size_t> counts;
    for (const auto& w : ds.wells()) ++counts[w.county];
    return counts;
}

std::vector<std::string> county_names(const Dataset& ds) {
    std::vector<std::string> names;
    std::unordered_set<std::string> seen;
    for (const auto& w : ds.wells())
        if (seen.insert(w.county).second) names.push_back(w.county);
    return names;
}

std::size_t train_size(std::size_t n, double train_frac) {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw ConfigError("train fraction must lie in (0, 1)");
    // The epsilon absorbs products like 0.7 * 10 = 7.000000000000001.
    auto k = static_cast<std::size_t>(std::ceil(train_frac * static_cast<double>(n) - 1e-9));
    if (n >= 2) k = std::clamp<std::size_t>(k, 1, n - 1);
    return std::min(k, n);
}

std::size_t validation_size(std::size_t n, double val_frac) {
    if (!(val_frac > 0.0 && val_frac < 1.0))
        throw ConfigError("validation fraction must lie in (0, 1)");
    if (n < 2) throw DataError("validation split needs at least 2 wells");
    auto k = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, 1, n - 1);
}

namespace {

std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Fisher-Yates with an explicit draw so the result does not depend on
    // the standard library's shuffle implementation.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

Partition split_at(const Dataset& ds, std::size_t k, Rng& rng) {
    const auto idx = permutation(ds.size(), rng);
    std::span<const std::size_t> all(idx);
    return {subset(ds.wells(), all.first(k), ds.months()),
            subset(ds.wells(), all.subspan(k), ds.months())};
}

}  // namespace

Partition shuffle_split(const Dataset& ds, double train_frac, Rng& rng) {
    if (ds.empty()) throw DataError("cannot split an empty dataset");
    return split_at(ds, train_size(ds.size(), train_frac), rng);
}

Partition validation_split(const Dataset& train, double val_frac, Rng& rng) {
    const auto n_val = validation_size(train.size(), val_frac);
    auto p = split_at(train, train.size() - n_val, rng);
    return p;
}

WindowPair window(const WellRecord& well, std::size_t n_input) {
    const auto n = well.production.size();
    if (n_input < 1 || n_input >= n)
        throw ConfigError("n_input " + std::to_string(n_input) + " out of range for a " +
                          std::to_string(n) + "-month series");
    WindowPair w;
    w.input.assign(well.production.begin(), well.production.begin() + n_input);
    w.label.assign(well.production.begin() + n_input, well.production.end());
    return w;
}

std::vector<double> Scaler::apply(std::span<const double> v) const {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [this](double x) { return x / scale; });
    return out;
}

std::vector<double> Scaler::invert(std::span<const double> v) const {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [this](double x) { return x * scale; });
    return out;
}

Scaler fit_scaler(const Dataset& train) {
    if (train.empty()) throw DataError("cannot fit a scaler on an empty dataset");
    double mx = 0.0;
    for (const auto& w : train.wells())
        for (double v : w.production) mx = std::max(mx, v);
    if (!(mx > 0.0)) throw DataError("cannot fit a scaler on all-zero production");
    return Scaler{mx};
}

void SynthConfig::validate() const {
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("noise must be >= 0");
    if (months < 5) throw ConfigError("synthetic series need at least 5 months");
    for (const auto& c : counties) {
        if (c.name.empty()) throw ConfigError("synthetic county name is empty");
        auto check = [&](double lo, double hi, const char* what) {
            if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
                throw ConfigError("county " + c.name + ": invalid " + what + " range");
        };
        check(c.qi_min, c.qi_max, "qi");
        check(c.b_min, c.b_max, "b");
        check(c.di_min, c.di_max, "di");
        if (c.b_max > 2.0) throw ConfigError("county " + c.name + ": b must lie in (0, 2]");
    }
}

SynthResult synth_generate(const SynthConfig& cfg, Rng& rng) {
    cfg.validate();
    std::vector<WellRecord> wells;
    std::vector<TruthRow> truth;
        std::normal_distribution<double> eps(0.0, 1.0);
    auto uniform = [&](double lo, double hi) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        return lo + (hi - lo) * u(rng);
    };
    for (std::size_t c = 0; c < cfg.counties.size(); ++c) {
        const auto& county = cfg.counties[c];
        const std::size_t n = county.wells ? county.wells : cfg.wells_per_county;
        for (std::size_t i = 0; i < n; ++i) {
            ArpsParams p;
            p.qi = uniform(county.qi_min, county.qi_max);
            p.b = uniform(county.b_min, county.b_max);
            p.di = uniform(county.di_min, county.di_max);
            WellRecord w;
            char id[48];
            std::snprintf(id, sizeof(id), "SYN-%02zu-%04zu", c + 1, i + 1);
            w.api_id = id;
            w.county = county.name;
            w.state = cfg.state;
            w.production = arps_forecast(p, 0, cfg.months - 1);
            if (cfg.noise > 0.0)
                for (auto& v : w.production) v *= std::max(0.0, 1.0 + cfg.noise * eps(rng));
            truth.push_back({w.api_id, p});
            wells.push_back(std::move(w));
        }
    }
    return {Dataset(std::move(wells), cfg.months), std::move(truth)};
}

void write_truth_csv(std::ostream& out, std::span<const TruthRow> truth) {
    out << "Well-API,Qi,b,Di\n";
    for (const auto& t : truth)
        out << t.api_id << ',' << format_double(t.params.qi) << ',' << format_double(t.params.b)
            << ',' << format_double(t.params.di) << '\n';
}

std::vector<TruthRow> read_truth_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "Well-API,Qi,b,Di")
        throw DataError("truth file must start with Well-API,Qi,b,Di");
    std::vector<TruthRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 4) throw DataError("truth row must have 4 fields");
        rows.push_back({std::string(f[0]), {parse_double(f[1]), parse_double(f[2]), parse_double(f[3])}});
    }
    return rows;
}

}  // namespace declinecast
