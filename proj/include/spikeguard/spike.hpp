#pragma once

// Three-stage spike detection and regularization: multi-period STL removes
// weekly and monthly cycles, a Huber-robust Kalman filter tracks the
// deseasonalized level, and each observation is checked against an interval
// centred on the one-step prediction plus the seasonal term. Flagged points
// are replaced by the filtered level plus the seasonal term.

#include <cstddef>
#include <string>
#include <vector>

#include "spikeguard/kalman.hpp"
#include "spikeguard/series.hpp"
#include "spikeguard/stl.hpp"

namespace spikeguard::spike {

struct SpikeDetectorConfig {
    double lambda = 3.0;
    std::vector<std::size_t> periods{stl::kWeeklyPeriod, stl::kMonthlyPeriod};
    kalman::HuberConfig huber{};
    // One entry per period; empty means StlParams::defaults(period) with one
    // robustness pass.
    std::vector<stl::StlParams> stl{};
    std::size_t mstl_iterations = 1;

    void validate() const;
    std::vector<stl::StlParams> resolved_stl() const;
};

struct Bounds {
    double lower;
    double upper;
};

// centre = prior_mean + seasonal; half-width = lambda * sqrt(prior_var + r).
// Throws std::invalid_argument when prior_var + r <= 0 or lambda < 0.
Bounds adaptive_bounds(double prior_mean, double prior_var, double seasonal, double r,
                       double lambda);

struct SpikeEntry {
    std::size_t index;
    double observed;
    double lower;
    double upper;
    double replacement;
};

struct SpikeReport {
    std::vector<SpikeEntry> entries;
    std::size_t series_length = 0;

    std::size_t total() const noexcept { return entries.size(); }
    double fraction() const noexcept {
        return series_length == 0 ? 0.0
                                  : static_cast<double>(entries.size()) /
                                        static_cast<double>(series_length);
    }
    // CSV: index,observed,lower_bound,upper_bound,replacement
    std::string to_csv() const;
};

struct Regularization {
    series::TimeSeries regularized;
    SpikeReport report;
    kalman::FilterTrace trace;
    stl::MultiSeasonalResult decomposition;
    std::vector<Bounds> bounds;  // one per index
};

Regularization detect_and_regularize(const series::TimeSeries& series,
                                     const SpikeDetectorConfig& config);

struct DeltaSummary {
    std::size_t changed = 0;
    double max_abs_delta = 0.0;
    double variance_ratio = 1.0;  // var(regularized) / var(raw)
};

DeltaSummary regularization_delta(const series::TimeSeries& raw,
                                  const series::TimeSeries& regularized);

}  // namespace spikeguard::spike
