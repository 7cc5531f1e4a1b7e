#include "declinecast/arps.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "declinecast/dataset.hpp"
#include "declinecast/errors.hpp"

namespace declinecast {

bool ArpsBounds::contains(const ArpsParams& p) const noexcept {
    return p.qi >= lower.qi && p.qi <= upper.qi && p.b >= lower.b && p.b <= upper.b &&
           p.di >= lower.di && p.di <= upper.di;
}

ArpsParams ArpsBounds::clamp(const ArpsParams& p) const noexcept {
    return {std::clamp(p.qi, lower.qi, upper.qi), std::clamp(p.b, lower.b, upper.b),
            std::clamp(p.di, lower.di, upper.di)};
}

void LmConfig::validate() const {
    if (max_iterations < 1) throw ConfigError("LM max_iterations must be >= 1");
    if (!(tolerance > 0.0)) throw ConfigError("LM tolerance must be > 0");
    if (!(lambda0 > 0.0) || !(lambda_up > 1.0) || !(lambda_down > 0.0 && lambda_down < 1.0))
        throw ConfigError("LM damping factors out of range");
    const auto& lo = bounds.lower;
    const auto& hi = bounds.upper;
    if (!(lo.qi > 0.0 && lo.b > 0.0 && lo.di > 0.0) || hi.b > 2.0 || lo.qi > hi.qi ||
        lo.b > hi.b || lo.di > hi.di)
        throw ConfigError("LM bounds inconsistent with qi > 0, di > 0, 0 < b <= 2");
}

void validate(const ArpsParams& p) {
    if (!(p.qi > 0.0) || !(p.di > 0.0) || !(p.b > 0.0 && p.b <= 2.0))
        throw ConfigError("Arps parameters require qi > 0, di > 0, 0 < b <= 2");
}

double arps_rate(const ArpsParams& p, double t) noexcept {
    return p.qi * std::exp(-std::log1p(p.b * p.di * t) / p.b);
}

std::vector<double> arps_forecast(const ArpsParams& p, std::size_t t_from, std::size_t t_to) {
    if (t_from > t_to) throw ConfigError("arps_forecast: t_from must not exceed t_to");
    std::vector<double> out(t_to - t_from + 1);
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = arps_rate(p, static_cast<double>(t_from + k));
    return out;
}

ArpsGradient arps_gradient(const ArpsParams& p, double t) noexcept {
    const double u = 1.0 + p.b * p.di * t;
    const double log_u = std::log1p(p.b * p.di * t);
    const double q = p.qi * std::exp(-log_u / p.b);
    return {q / p.qi, q * (log_u / (p.b * p.b) - p.di * t / (p.b * u)), -q * t / u};
}

double arps_sse(const ArpsParams& p, std::span<const double> observed) noexcept {
    double sse = 0.0;
    for (std::size_t t = 0; t < observed.size(); ++t) {
        const double r = arps_rate(p, static_cast<double>(t)) - observed[t];
        sse += r * r;
    }
    return sse;
}

ArpsParams default_init(std::span<const double> observed) {
    if (observed.empty()) throw ConfigError("default_init needs at least one observation");
    return {observed[0] > 0.0 ? observed[0] : 1.0, 1.0, 0.1};
}

LmResult lm_fit(std::span<const double> observed, const ArpsParams& init, const LmConfig& cfg) {
    cfg.validate();
    const std::size_t n = observed.size();
    if (n < 3) throw ConfigError("lm_fit needs at least 3 observations, got " + std::to_string(n));
    double energy = 0.0;
    for (double v : observed) {
        if (!std::isfinite(v) || v < 0.0) throw DataError("lm_fit: observations must be finite and >= 0");
        energy += v * v;
    }
    if (energy == 0.0) throw DataError("lm_fit: all observations are zero");

    LmResult res;
    ArpsParams x = cfg.bounds.clamp(init);
    double sse = arps_sse(x, observed);
    if (!std::isfinite(sse)) throw NumericalError("lm_fit: non-finite residuals at the initial point");
    res.initial_sse = sse;
    res.sse_trace.push_back(sse);

    const double exact_floor = 1e-30 * energy;
    auto finish = [&](LmStop stop) {
        res.params = x;
        res.sse = sse;
        res.stop = stop;
        return res;
    };
    if (sse <= exact_floor) return finish(LmStop::exact_fit);

    double lambda = cfg.lambda0;
    Eigen::MatrixXd jac(n, 3);
    Eigen::VectorXd resid(n);
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        res.iterations = iter;
        for (std::size_t t = 0; t < n; ++t) {
            const auto g = arps_gradient(x, static_cast<double>(t));
            jac(t, 0) = g.d_qi;
            jac(t, 1) = g.d_b;
            jac(t, 2) = g.d_di;
            resid(t) = arps_rate(x, static_cast<double>(t)) - observed[t];
        }
        const Eigen::Matrix3d jtj = jac.transpose() * jac;
        const Eigen::Vector3d grad = jac.transpose() * resid;
        if (grad.isZero(0.0)) return finish(LmStop::tolerance);

        while (true) {
            Eigen::Matrix3d damped = jtj;
            for (int k = 0; k < 3; ++k)
                damped(k, k) += lambda * std::max(jtj(k, k), 1e-300);
            const Eigen::Vector3d step = damped.ldlt().solve(-grad);
            const ArpsParams cand =
                cfg.bounds.clamp({x.qi + step(0), x.b + step(1), x.di + step(2)});
            const double cand_sse = arps_sse(cand, observed);
            if (std::isfinite(cand_sse) && cand_sse < sse) {
                const double rel = (sse - cand_sse) / sse;
                x = cand;
                sse = cand_sse;
                res.sse_trace.push_back(sse);
                lambda = std::max(lambda * cfg.lambda_down, 1e-20);
                if (sse <= exact_floor) return finish(LmStop::exact_fit);
                if (rel < cfg.tolerance) return finish(LmStop::tolerance);
                break;
            }
            lambda *= cfg.lambda_up;
            if (lambda > cfg.lambda_max) return finish(LmStop::lambda_overflow);
        }
    }
    return finish(LmStop::max_iterations);
}

LmResult county_baseline_fit(const Dataset& county, const LmConfig& cfg) {
    if (county.empty()) throw DataError("county_baseline_fit: empty county");
    std::vector<double> mean(county.months(), 0.0);
    for (const auto& w : county.wells())
        for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += w.production[t];
    const double inv = 1.0 / static_cast<double>(county.size());
    for (auto& v : mean) v *= inv;
    return lm_fit(mean, default_init(mean), cfg);
}

LmResult refit_from_window(const ArpsParams& baseline, std::span<const double> window,
                           const LmConfig& cfg) {
    return lm_fit(window, baseline, cfg);
}

void write_params(std::ostream& out, const ArpsParams& p) {
    out << "qi=" << format_double(p.qi) << '\n'
        << "b=" << format_double(p.b) << '\n'
        << "di=" << format_double(p.di) << '\n';
}

ArpsParams read_params(std::istream& in) {
    ArpsParams p;
    bool seen[3] = {false, false, false};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("malformed Arps parameter line: " + line);
        const auto key = line.substr(0, eq);
        const double v = parse_double(std::string_view(line).substr(eq + 1));
        if (key == "qi") { p.qi = v; seen[0] = true; }
        else if (key == "b") { p.b = v; seen[1] = true; }
        else if (key == "di") { p.di = v; seen[2] = true; }
        else throw DataError("unknown Arps parameter key: " + key);
    }
    if (!(seen[0] && seen[1] && seen[2])) throw DataError("Arps parameter file needs qi, b and di");
    validate(p);
    return p;
}

void save_params(const std::string& path, const ArpsParams& p) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    write_params(out, p);
}

ArpsParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_params(in);
}

}  // namespace declinecast
