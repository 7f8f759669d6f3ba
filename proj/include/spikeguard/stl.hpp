#pragma once

// LOESS smoothing and additive season-trend decomposition (STL), including
// sequential extraction of several seasonal periods.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spikeguard/series.hpp"

namespace spikeguard::stl {

inline constexpr std::size_t kWeeklyPeriod = 7 * 48;
inline constexpr std::size_t kMonthlyPeriod = 30 * 48;

struct StlParams {
    std::size_t period = kWeeklyPeriod;
    std::size_t seasonal_span = 7;  // cycle-subseries smoother, odd, >= 7
    std::size_t trend_span = 0;     // odd, > period
    std::size_t low_pass_span = 0;  // odd, >= period
    int inner_iterations = 2;
    int robust_iterations = 0;  // bisquare reweighting passes
    int loess_degree = 1;
    // Evaluate the smoother every `jump` points and interpolate in between.
    std::size_t seasonal_jump = 1;
    std::size_t trend_jump = 1;
    std::size_t low_pass_jump = 1;

    // Standard STL choices for the given period: trend span is the next odd
    // integer >= 1.5 * period / (1 - 1.5 / seasonal_span), low-pass span the
    // next odd integer >= period, jumps ceil(span / 10).
    static StlParams defaults(std::size_t period, std::size_t seasonal_span = 7);

    // Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

struct DecompositionResult {
    std::vector<double> seasonal;
    std::vector<double> trend;
    std::vector<double> remainder;
    std::vector<double> robustness_weights;  // final bisquare weights (all 1 if not robust)
};

// Local polynomial smoother over the `span` nearest neighbours of each point,
// tricube distance weights times optional robustness weights in [0, 1].
// Throws std::invalid_argument for an even span, span > length, degree not in
// {0, 1} or malformed weights.
std::vector<double> loess_smooth(std::span<const double> values, std::size_t span, int degree,
                                 std::span<const double> robustness_weights = {},
                                 std::size_t jump = 1);

// Single local fit at an arbitrary (possibly out-of-range) position using the
// neighbours values[lo, hi). Returns false when all weights vanish.
bool loess_estimate(std::span<const double> values, std::span<const double> robustness_weights,
                    std::size_t span, int degree, double position, std::size_t lo,
                    std::size_t hi, double& fitted);

// Throws std::invalid_argument if values.size() < 2 * period or params are invalid.
DecompositionResult stl_decompose(std::span<const double> values, const StlParams& params);

struct MultiSeasonalResult {
    std::vector<double> seasonal_total;
    std::vector<double> deseasonalized;
    std::vector<DecompositionResult> per_period;
    std::vector<std::vector<double>> stage_inputs;  // series fed to each per-period STL
};

inline constexpr std::size_t kDefaultMstlIterations = 2;

// Decomposes at params[0].period, removes that seasonal, decomposes the
// remainder series at params[1].period, and so on. Periods must ascend.
// Each further iteration adds one period's seasonal back and refits it with
// the other seasonals removed (the MSTL scheme); a single period is fitted
// once. per_period and stage_inputs hold the last fit of each period.
MultiSeasonalResult multi_seasonal_decompose(std::span<const double> values,
                                             std::span<const StlParams> params,
                                             std::size_t iterations = kDefaultMstlIterations);
MultiSeasonalResult multi_seasonal_decompose(const series::TimeSeries& series,
                                             std::span<const std::size_t> periods,
                                             std::size_t iterations = kDefaultMstlIterations);

// CSV with header index,observed,seasonal,trend,remainder.
std::string to_csv(std::span<const double> observed, const DecompositionResult& result);

}  // namespace spikeguard::stl
