#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace declinecast {

class Dataset;

/// Hyperbolic decline parameters. Units: qi in Mscf/month, di in 1/month.
struct ArpsParams {
    double qi = 0.0;
    double b = 1.0;
    double di = 0.1;

    friend bool operator==(const ArpsParams&, const ArpsParams&) = default;
};

struct ArpsBounds {
    ArpsParams lower{1e-3, 1e-3, 1e-6};
    ArpsParams upper{1e9, 2.0, 10.0};

    bool contains(const ArpsParams& p) const noexcept;
    ArpsParams clamp(const ArpsParams& p) const noexcept;
};

struct LmConfig {
    int max_iterations = 200;
    double lambda0 = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 0.1;
    double tolerance = 1e-10;  // relative SSE change
    double lambda_max = 1e16;
    ArpsBounds bounds{};

    void validate() const;
};

enum class LmStop { tolerance, exact_fit, lambda_overflow, max_iterations };

struct LmResult {
    ArpsParams params;
    double sse = 0.0;
    double initial_sse = 0.0;
    int iterations = 0;
    LmStop stop = LmStop::tolerance;
    // SSE after every accepted step, starting with the initial SSE.
    std::vector<double> sse_trace;

    bool converged() const noexcept { return stop != LmStop::max_iterations; }
};

void validate(const ArpsParams& p);

/// qi / (1 + b*di*t)^(1/b), evaluated as qi * exp(-log1p(b*di*t) / b).
double arps_rate(const ArpsParams& p, double t) noexcept;

/// Rates at integer months t_from..t_to inclusive.
std::vector<double> arps_forecast(const ArpsParams& p, std::size_t t_from, std::size_t t_to);

/// Partial derivatives of arps_rate with respect to (qi, b, di).
struct ArpsGradient {
    double d_qi;
    double d_b;
    double d_di;
};
ArpsGradient arps_gradient(const ArpsParams& p, double t) noexcept;

double arps_sse(const ArpsParams& p, std::span<const double> observed) noexcept;

/// Bounded Levenberg-Marquardt fit of the model to observed[t], t = 0..n-1.
LmResult lm_fit(std::span<const double> observed, const ArpsParams& init, const LmConfig& cfg = {});

ArpsParams default_init(std::span<const double> observed);

/// Fit to the elementwise mean production of every well in the dataset.
LmResult county_baseline_fit(const Dataset& county, const LmConfig& cfg = {});

/// Per-well benchmark: refit on the first months starting from a county baseline.
LmResult refit_from_window(const ArpsParams& baseline, std::span<const double> window,
                           const LmConfig& cfg = {});

void write_params(std::ostream& out, const ArpsParams& p);
ArpsParams read_params(std::istream& in);
void save_params(const std::string& path, const ArpsParams& p);
ArpsParams load_params(const std::string& path);

}  // namespace declinecast
