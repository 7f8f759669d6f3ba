#pragma once

// Statistical baseline forecasters and the container that holds per-window
// forecasts for scoring, including forecasts produced outside the toolkit.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spikeguard::baselines {

// forecast[h] = lookback[L - period + (h mod period)].
std::vector<double> seasonal_naive_forecast(std::span<const double> lookback, std::size_t period,
                                            std::size_t horizon);

struct ArModel {
    int p = 0;
    int d = 0;
    std::vector<double> coefficients;  // phi_1..phi_p on the (differenced) series
    double intercept = 0.0;
    double aic = 0.0;
    double sigma2 = 0.0;
    std::size_t n_eff = 0;
};

struct ArGrid {
    std::vector<int> p_values{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> d_values{0, 1};

    void validate() const;
};

// Least-squares AR(p) on the d-times differenced series. Every candidate of a
// grid is fitted on the same target indices [first_target, n) so their AICs
// are comparable. Returns nullopt for a singular design.
std::optional<ArModel> fit_ar(std::span<const double> lookback, int p, int d,
                              std::size_t first_target);

// All successfully fitted grid candidates, in (d, p) order.
std::vector<ArModel> fit_ar_grid(std::span<const double> lookback, const ArGrid& grid = {});

// Minimum AIC = n ln(RSS / n) + 2 (p + 1); ties go to the smaller (d, p).
// Throws std::invalid_argument when the lookback is shorter than
// max(p) + 10 and std::runtime_error when no candidate can be fitted.
ArModel fit_auto_ar(std::span<const double> lookback, const ArGrid& grid = {});

// Recursive multi-step forecast; differencing is undone from the last level.
std::vector<double> ar_forecast(const ArModel& model, std::span<const double> lookback,
                                std::size_t horizon);

struct HoltWintersModel {
    double alpha = 0.5;
    double beta = 0.5;
    double gamma = 0.5;
    std::size_t period = 1;
    double level = 0.0;
    double trend = 0.0;
    std::vector<double> seasonal;  // seasonal[t % period] for absolute time t
    std::size_t next_t = 0;        // time index of the first forecast step
    double sse = 0.0;
};

// Additive Holt-Winters; (alpha, beta, gamma) chosen from {0.05, 0.20, ..., 0.95}^3
// by in-sample one-step squared error, first grid point winning ties.
HoltWintersModel holt_winters_fit(std::span<const double> lookback, std::size_t period);
// Runs the recursion with fixed smoothing constants.
HoltWintersModel holt_winters_apply(std::span<const double> lookback, std::size_t period,
                                    double alpha, double beta, double gamma);
std::vector<double> holt_winters_forecast(const HoltWintersModel& model, std::size_t horizon);

// One row of H forecasts per window. `origins[w]` is the series index of the
// first forecast step (h = 0) of window w.
struct ForecastMatrix {
    std::string label;
    std::size_t horizon = 0;
    std::vector<std::size_t> origins;
    std::vector<double> values;  // row-major, origins.size() x horizon

    std::size_t windows() const noexcept { return origins.size(); }
    std::span<const double> row(std::size_t w) const {
        return std::span<const double>(values).subspan(w * horizon, horizon);
    }
    void validate() const;
    // CSV: window_start,h,prediction
    std::string to_csv() const;
};

// Reads "window_start,h,prediction". Every window must provide h = 0..H-1
// exactly once. When `known_origins` is given, any other window_start is an
// error.
ForecastMatrix load_external_predictions(
    const std::filesystem::path& path, std::size_t expected_horizon,
    std::optional<std::span<const std::size_t>> known_origins = std::nullopt,
    std::string label = "external");

}  // namespace spikeguard::baselines
