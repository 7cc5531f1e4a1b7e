#include "declinecast/nn/model_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace declinecast::nn {

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::istringstream next(const char* expect_key) {
        std::string line;
        if (!std::getline(in_, line))
            throw ModelFormatError(std::string("model file truncated before '") + expect_key + "'");
        ++line_no_;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key != expect_key)
            throw ModelFormatError("model file line " + std::to_string(line_no_) + ": expected '" +
                                   expect_key + "', found '" + key + "'");
        return ss;
    }

    int line() const noexcept { return line_no_; }

private:
    std::istream& in_;
    int line_no_ = 0;
};

template <typename T>
T take(std::istringstream& ss, const char* what) {
    T v{};
    if (!(ss >> v)) throw ModelFormatError(std::string("model file: bad ") + what);
    return v;
}

std::vector<double> take_values(std::istringstream& ss, std::size_t n, const char* what) {
    std::vector<double> out;
    out.reserve(n);
    std::string tok;
    while (ss >> tok) {
        try {
            out.push_back(parse_double(tok));
        } catch (const DataError&) {
            throw ModelFormatError(std::string("model file: non-numeric ") + what);
        }
    }
    if (out.size() != n)
        throw ModelFormatError(std::string("model file: expected ") + std::to_string(n) + " " + what +
                               " values, found " + std::to_string(out.size()));
    return out;
}

}  // namespace

void write_model(std::ostream& out, const NetworkModel& model) {
    model.validate();
    out << "declinecast-model " << kModelFormatVersion << '\n';
    out << "n_input " << model.n_input << '\n';
    out << "m_output " << model.m_output << '\n';
    out << "scaler " << (model.scaler ? format_double(model.scaler->scale) : "none") << '\n';
    out << "layers " << model.layers.size() << '\n';
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const auto& l = model.layers[i];
        out << "layer " << i << " in " << l.in() << " out " << l.out() << " activation "
            << to_string(l.activation) << " trainable " << (l.trainable ? 1 : 0) << " dropout "
            << (i < model.dropout_rates.size() ? format_double(model.dropout_rates[i]) : "0")
            << '\n';
    }
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const auto& l = model.layers[i];
        out << "weights " << i << '\n';
        for (std::size_t r = 0; r < l.out(); ++r) {
            out << "row";
            for (double w : l.weights.row(r)) out << ' ' << format_double(w);
            out << '\n';
        }
        out << "biases";
        for (double b : l.biases) out << ' ' << format_double(b);
        out << '\n';
    }
    out << "end\n";
}

NetworkModel read_model(std::istream& in) {
    LineReader r(in);
    auto ss = r.next("declinecast-model");
    const int version = take<int>(ss, "version");
    if (version != kModelFormatVersion)
        throw ModelFormatError("model format version " + std::to_string(version) +
                               " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
    NetworkModel m;
    ss = r.next("n_input");
    m.n_input = take<std::size_t>(ss, "n_input");
    ss = r.next("m_output");
    m.m_output = take<std::size_t>(ss, "m_output");
    ss = r.next("scaler");
    const auto scaler = take<std::string>(ss, "scaler");
    if (scaler != "none") {
        try {
            m.scaler = Scaler{parse_double(scaler)};
        } catch (const DataError&) {
            throw ModelFormatError("model file: bad scaler value");
        }
        if (!(m.scaler->scale > 0.0)) throw ModelFormatError("model file: scaler must be > 0");
    }
    ss = r.next("layers");
    const auto n_layers = take<std::size_t>(ss, "layer count");
    if (n_layers == 0 || n_layers > 1024) throw ModelFormatError("model file: bad layer count");
    std::vector<double> dropout;
    for (std::size_t i = 0; i < n_layers; ++i) {
        ss = r.next("layer");
        if (take<std::size_t>(ss, "layer index") != i) throw ModelFormatError("model file: layer index out of order");
        DenseLayer l;
        std::string key;
        std::size_t in_w = 0, out_w = 0;
        int trainable = 0;
        std::string act, rate;
        ss >> key >> in_w;
        if (key != "in") throw ModelFormatError("model file: bad layer header");
        ss >> key >> out_w;
        if (key != "out") throw ModelFormatError("model file: bad layer header");
        ss >> key >> act;
        if (key != "activation") throw ModelFormatError("model file: bad layer header");
        ss >> key >> trainable;
        if (key != "trainable") throw ModelFormatError("model file: bad layer header");
        ss >> key >> rate;
        if (key != "dropout" || !ss) throw ModelFormatError("model file: bad layer header");
        try {
            l.activation = activation_from_string(act);
        } catch (const DataError& e) {
            throw ModelFormatError(e.what());
        }
        l.trainable = trainable != 0;
        l.weights = Matrix(out_w, in_w);
        l.biases.assign(out_w, 0.0);
        if (i + 1 < n_layers) dropout.push_back(parse_double(rate));
        m.layers.push_back(std::move(l));
    }
    m.dropout_rates = std::move(dropout);
    for (std::size_t i = 0; i < n_layers; ++i) {
        ss = r.next("weights");
        if (take<std::size_t>(ss, "layer index") != i) throw ModelFormatError("model file: weights out of order");
        auto& l = m.layers[i];
        for (std::size_t row = 0; row < l.out(); ++row) {
            ss = r.next("row");
            const auto vals = take_values(ss, l.in(), "weight");
            std::copy(vals.begin(), vals.end(), l.weights.row(row).begin());
        }
        ss = r.next("biases");
        l.biases = take_values(ss, l.out(), "bias");
    }
    r.next("end");
    try {
        m.validate();
    } catch (const ConfigError& e) {
        throw ModelFormatError(std::string("model file: ") + e.what());
    }
    return m;
}

void save_model(const NetworkModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    write_model(out, model);
    if (!out) throw ConfigError("failed writing " + path);
}

NetworkModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return read_model(in);
    } catch (const ModelFormatError& e) {
        throw ModelFormatError(path + ": " + e.what());
    }
}

}  // namespace declinecast::nn
