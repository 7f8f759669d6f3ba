#include "spikeguard/spike.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spikeguard/csv_util.hpp"

namespace spikeguard::spike {

void SpikeDetectorConfig::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (periods.empty()) throw std::invalid_argument("at least one seasonal period is required");
    if (mstl_iterations < 1) throw std::invalid_argument("mstl_iterations must be >= 1");
    for (std::size_t i = 0; i < periods.size(); ++i)
        if (periods[i] < 2 || (i > 0 && periods[i] <= periods[i - 1]))
            throw std::invalid_argument("seasonal periods must be >= 2 and strictly ascending");
    if (!stl.empty() && stl.size() != periods.size())
        throw std::invalid_argument("need one STL parameter set per period");
    for (std::size_t i = 0; i < stl.size(); ++i)
        if (stl[i].period != periods[i])
            throw std::invalid_argument("STL parameter period does not match configured period");
    huber.validate();
}

std::vector<stl::StlParams> SpikeDetectorConfig::resolved_stl() const {
    if (!stl.empty()) return stl;
    std::vector<stl::StlParams> out;
    for (auto p : periods) {
        out.push_back(stl::StlParams::defaults(p));
        out.back().robust_iterations = 1;
    }
    return out;
}

Bounds adaptive_bounds(double prior_mean, double prior_var, double seasonal, double r,
                       double lambda) {
    if (!(prior_var + r > 0.0))
        throw std::invalid_argument("prior variance plus measurement variance must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    const double centre = prior_mean + seasonal;
    const double half = lambda * std::sqrt(prior_var + r);
    return {centre - half, centre + half};
}

std::string SpikeReport::to_csv() const {
    std::string out = "index,observed,lower_bound,upper_bound,replacement\n";
    for (const auto& e : entries) {
        out += std::to_string(e.index);
        for (double v : {e.observed, e.lower, e.upper, e.replacement}) {
            out += ',';
            out += csv::format_double(v);
        }
        out += '\n';
    }
    return out;
}

Regularization detect_and_regularize(const series::TimeSeries& series,
                                     const SpikeDetectorConfig& config) {
    config.validate();
    if (!series.is_contiguous())
        throw std::invalid_argument("series has gaps; fill them before regularizing");
    const std::size_t n = series.size();
    const std::size_t longest = *std::max_element(config.periods.begin(), config.periods.end());
    if (n < 2 * longest)
        throw std::invalid_argument("series of length " + std::to_string(n) +
                                    " is shorter than two of its longest period (" +
                                    std::to_string(longest) + ")");

    const auto params = config.resolved_stl();
    auto decomposition = stl::multi_seasonal_decompose(series.values(), params, config.mstl_iterations);
    const auto& seasonal = decomposition.seasonal_total;
    const auto& deseasonalized = decomposition.deseasonalized;

    auto setup = kalman::local_trend_setup(deseasonalized);
    const double r = setup.model.R(0, 0);
    kalman::RobustFilter filter(setup.model, config.huber, setup.init);

    std::vector<double> out(series.values().begin(), series.values().end());
    Regularization result{series, {}, {}, {}, {}};
    result.trace.measurement_var = r;
    result.trace.steps.reserve(n);
    result.bounds.reserve(n);
    result.report.series_length = n;

    for (std::size_t k = 0; k < n; ++k) {
        const auto& prior = filter.predict();
        const double prior_mean = (setup.model.H * prior.x)(0);
        const double prior_var = (setup.model.H * prior.P * setup.model.H.transpose())(0, 0);
        const Bounds b = adaptive_bounds(prior_mean, prior_var, seasonal[k], r, config.lambda);

        kalman::FilterStep step;
        try {
            step = filter.update(deseasonalized[k]);
        } catch (const std::exception& e) {
            throw std::runtime_error("filter step " + std::to_string(k) + ": " + e.what());
        }
        const double z = series[k];
        if (z < b.lower || z > b.upper) {
            const double replacement =
                std::clamp(step.posterior_mean + seasonal[k], b.lower, b.upper);
            out[k] = replacement;
            result.report.entries.push_back({k, z, b.lower, b.upper, replacement});
        }
        result.bounds.push_back(b);
        result.trace.steps.push_back(std::move(step));
    }

    result.regularized = series.with_values(std::move(out));
    result.decomposition = std::move(decomposition);
    return result;
}

namespace {

double variance(std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(x.size());
}

}  // namespace

DeltaSummary regularization_delta(const series::TimeSeries& raw,
                                  const series::TimeSeries& regularized) {
    if (raw.size() != regularized.size())
        throw std::invalid_argument("raw and regularized series differ in length");
    DeltaSummary s;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double d = std::fabs(raw[i] - regularized[i]);
        if (raw[i] != regularized[i]) ++s.changed;
        s.max_abs_delta = std::max(s.max_abs_delta, d);
    }
    const double vr = variance(raw.values());
    const double vg = variance(regularized.values());
    s.variance_ratio = vr > 0.0 ? vg / vr : (vg > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    return s;
}

}  // namespace spikeguard::spike
