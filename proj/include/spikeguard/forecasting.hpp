#pragma once

// Runs a baseline forecaster over every window of a WindowSet, refitting per
// window (or every `refit_stride` windows) and optionally working in log space.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "spikeguard/baselines.hpp"
#include "spikeguard/windowing.hpp"

namespace spikeguard::forecasting {

enum class ModelKind { seasonal_naive, auto_ar, holt_winters };

std::string_view model_name(ModelKind kind);
// Throws std::invalid_argument for an unknown name.
ModelKind parse_model(std::string_view name);

struct ModelOptions {
    std::size_t naive_period = 336;
    std::size_t hw_period = 48;
    baselines::ArGrid ar_grid{};
    // Fit on ln(x + eps) per window (eps = 0 when the lookback is positive,
    // else 1 - min) and map forecasts back with exp(.) - eps.
    bool log_transform = false;
    // Refit every k-th window; windows in between reuse the fitted
    // parameters on their own lookback.
    std::size_t refit_stride = 1;
};

// Output is identical for any thread count.
baselines::ForecastMatrix forecast_windows(std::span<const double> series,
                                           const windowing::WindowSet& windows, ModelKind kind,
                                           const ModelOptions& options, std::size_t threads = 1);

}  // namespace spikeguard::forecasting
