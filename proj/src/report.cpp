#include "declinecast/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "declinecast/errors.hpp"

namespace declinecast {

std::string format_sig6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_summary_csv(std::ostream& out, std::span<const BenchmarkRun> runs) {
    out << kSummaryHeader << '\n';
    for (const auto& run : runs) {
        const auto& agg = run.aggregate;
        double wells = 0.0, dnn = 0.0, arps = 0.0;
        for (const auto& c : agg.counties) {
            out << c.county << ',' << agg.n_input << ',' << format_sig6(c.mean_dnn_mae) << ','
                << format_sig6(c.mean_arps_mae) << ',' << format_double(c.mean_reduction) << ','
                << format_double(c.test_wells) << '\n';
            wells += c.test_wells;
            dnn += c.mean_dnn_mae * c.test_wells;
            arps += c.mean_arps_mae * c.test_wells;
        }
        out << kOverallLabel << ',' << agg.n_input << ',' << format_sig6(dnn / wells) << ','
            << format_sig6(arps / wells) << ',' << format_double(agg.overall_reduction) << ','
            << format_double(wells) << '\n';
    }
}

void write_trials_csv(std::ostream& out, std::span<const BenchmarkRun> runs) {
    out << "trial,seed,n_input,county,kind,test_wells,dnn_mae,arps_mae,dnn_mae_sd,arps_mae_sd,"
           "reduction,lm_fallbacks,trial_overall_reduction\n";
    for (const auto& run : runs)
        for (const auto& t : run.trials)
            for (const auto& c : t.counties)
                out << t.trial << ',' << t.seed << ',' << t.n_input << ',' << c.county << ','
                    << to_string(c.kind) << ',' << c.test_wells << ',' << format_sig6(c.mean_dnn_mae)
                    << ',' << format_sig6(c.mean_arps_mae) << ',' << format_sig6(c.sd_dnn_mae) << ','
                    << format_sig6(c.sd_arps_mae) << ',' << format_sig6(c.reduction) << ','
                    << c.lm_fallbacks << ',' << format_sig6(t.overall_reduction) << '\n';
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string join(std::span<const double> v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += format_sig6(v[i]);
    }
    return out;
}

struct Frame {
    double left = 70, right = 20, top = 40, bottom = 50;
    double width = 720, height = 420;
    double plot_w() const { return width - left - right; }
    double plot_h() const { return height - top - bottom; }
};

}  // namespace

std::string forecast_svg(const SampleForecast& s, const std::string& title) {
    const Frame f;
    const std::size_t months = s.actual.size();
    double ymax = 0.0;
    for (double v : s.actual) ymax = std::max(ymax, v);
    for (double v : s.dnn) ymax = std::max(ymax, v);
    for (double v : s.arps) ymax = std::max(ymax, v);
    if (!(ymax > 0.0)) ymax = 1.0;
    const double xspan = months > 1 ? static_cast<double>(months - 1) : 1.0;
    auto px = [&](double t) { return f.left + f.plot_w() * t / xspan; };
    auto py = [&](double v) { return f.top + f.plot_h() * (1.0 - v / ymax); };
    auto polyline = [&](std::span<const double> ys, std::size_t t0, const char* cls,
                        const char* color, const char* dash) {
        std::ostringstream o;
        o << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\"" << dash << " data-values=\"" << join(ys) << "\" points=\"";
        for (std::size_t i = 0; i < ys.size(); ++i)
            o << (i ? " " : "") << num(px(static_cast<double>(t0 + i))) << ',' << num(py(ys[i]));
        o << "\"/>\n";
        return o.str();
    };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
      << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\">\n";
    o << "<title>" << xml_escape(title) << "</title>\n";
    o << "<desc>well=" << xml_escape(s.api_id) << " n_input=" << s.n_input << " months=" << months
      << "</desc>\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << f.width << "\" height=\"" << f.height
      << "\" fill=\"white\"/>\n";
    const double in_end = px(static_cast<double>(s.n_input > 0 ? s.n_input - 1 : 0));
    o << "<rect class=\"input-region\" x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\""
      << num(in_end - f.left) << "\" height=\"" << num(f.plot_h()) << "\" fill=\"#d9d9d9\"/>\n";
    o << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.top + f.plot_h()) << "\" x2=\""
      << num(f.left + f.plot_w()) << "\" y2=\"" << num(f.top + f.plot_h())
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.top) << "\" x2=\"" << num(f.left)
      << "\" y2=\"" << num(f.top + f.plot_h()) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = ymax * k / 4.0;
        o << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(py(v) + 4)
          << "\" font-size=\"11\" text-anchor=\"end\">" << format_sig6(v) << "</text>\n";
    }
    o << "<text x=\"" << num(f.left + f.plot_w() / 2) << "\" y=\"" << num(f.height - 12)
      << "\" font-size=\"12\" text-anchor=\"middle\">Month</text>\n";
    o << "<text x=\"16\" y=\"" << num(f.top + f.plot_h() / 2)
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(f.top + f.plot_h() / 2) << ")\">Production (Mscf)</text>\n";
    o << "<text x=\"" << num(f.width / 2) << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">"
      << xml_escape(title) << "</text>\n";
    o << polyline(s.actual, 0, "actual", "black", "");
    o << polyline(s.dnn, s.n_input, "dnn", "#1f77b4", "");
    o << polyline(s.arps, s.n_input, "arps", "#d62728", " stroke-dasharray=\"6 4\"");
    const char* labels[] = {"Actual", "DNN", "Arps"};
    const char* colors[] = {"black", "#1f77b4", "#d62728"};
    for (int k = 0; k < 3; ++k) {
        const double y = f.top + 10 + 16 * k;
        const double x = f.left + f.plot_w() - 110;
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 24) << "\" y2=\""
          << num(y) << "\" stroke=\"" << colors[k] << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << num(x + 30) << "\" y=\"" << num(y + 4) << "\" font-size=\"11\">" << labels[k]
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string reduction_bar_svg(const AggregateReport& agg, const std::string& title) {
    const Frame f;
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& c : agg.counties) bars.emplace_back(c.county, c.mean_reduction);
    bars.emplace_back(kOverallLabel, agg.overall_reduction);

    double lo = 0.0, hi = 0.0;
    for (const auto& [_, v] : bars) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo <= 0.0) hi = lo + 1.0;
    auto py = [&](double v) { return f.top + f.plot_h() * (hi - v) / (hi - lo); };
    const double slot = f.plot_w() / static_cast<double>(bars.size());

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
      << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\">\n";
    o << "<title>" << xml_escape(title) << "</title>\n";
    o << "<desc>n_input=" << agg.n_input << " trials=" << agg.trials << "</desc>\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << f.width << "\" height=\"" << f.height
      << "\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(f.width / 2) << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">"
      << xml_escape(title) << "</text>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto& [name, v] = bars[i];
        const double x = f.left + slot * static_cast<double>(i) + slot * 0.15;
        const double y0 = py(0.0), y1 = py(v);
        const bool overall = i + 1 == bars.size();
        o << "<rect class=\"bar\" data-county=\"" << xml_escape(name) << "\" data-reduction=\""
          << format_double(v) << "\" x=\"" << num(x) << "\" y=\"" << num(std::min(y0, y1))
          << "\" width=\"" << num(slot * 0.7) << "\" height=\"" << num(std::abs(y1 - y0))
          << "\" fill=\"" << (overall ? "#555555" : "#1f77b4") << "\"/>\n";
        o << "<text x=\"" << num(x + slot * 0.35) << "\" y=\"" << num(std::min(y0, y1) - 4)
          << "\" font-size=\"11\" text-anchor=\"middle\">" << num(100.0 * v) << "%</text>\n";
        o << "<text x=\"" << num(x + slot * 0.35) << "\" y=\"" << num(f.top + f.plot_h() + 18)
          << "\" font-size=\"11\" text-anchor=\"middle\">" << xml_escape(name) << "</text>\n";
    }
    o << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(py(0.0)) << "\" x2=\""
      << num(f.left + f.plot_w()) << "\" y2=\"" << num(py(0.0)) << "\" stroke=\"black\"/>\n";
    o << "</svg>\n";
    return o.str();
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << content;
    if (!out) throw ConfigError("failed writing " + p.string());
}

std::string file_safe(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
    return out;
}

}  // namespace

void emit_report(std::span<const BenchmarkRun> runs, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "plots", ec);
    if (ec) throw ConfigError("cannot create " + out_dir.string() + ": " + ec.message());

    std::ostringstream summary, trials;
    write_summary_csv(summary, runs);
    write_trials_csv(trials, runs);
    write_file(out_dir / "summary.csv", summary.str());
    write_file(out_dir / "trials.csv", trials.str());

    for (const auto& run : runs) {
        const auto n = std::to_string(run.aggregate.n_input);
        write_file(out_dir / "plots" / ("reduction_n" + n + ".svg"),
                   reduction_bar_svg(run.aggregate, "Error reduction vs Arps, " + n + " input months"));
        if (run.trials.empty()) continue;
        for (const auto& c : run.trials.front().counties) {
            if (!c.sample) continue;
            write_file(out_dir / "plots" / ("forecast_" + file_safe(c.county) + "_n" + n + ".svg"),
                       forecast_svg(*c.sample, c.county + " well " + c.sample->api_id + ", " + n +
                                                   " input months"));
        }
    }
}

}  // namespace declinecast
