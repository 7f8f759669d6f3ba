#include "spikeguard/forecasting.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "spikeguard/features.hpp"

namespace spikeguard::forecasting {

std::string_view model_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::seasonal_naive:
        return "seasonal_naive";
    case ModelKind::auto_ar:
        return "auto_ar";
    case ModelKind::holt_winters:
        return "holt_winters";
    }
    return "unknown";
}

ModelKind parse_model(std::string_view name) {
    for (auto k : {ModelKind::seasonal_naive, ModelKind::auto_ar, ModelKind::holt_winters})
        if (model_name(k) == name) return k;
    throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

namespace {

// Fitted state carried between refits.
struct Fitted {
    baselines::ArModel ar;
    baselines::HoltWintersModel hw;
};

std::vector<double> forecast_one(std::span<const double> lookback, std::size_t horizon,
                                 ModelKind kind, const ModelOptions& opt, bool refit,
                                 Fitted& fitted) {
    std::vector<double> work(lookback.begin(), lookback.end());
    double eps = 0.0;
    if (opt.log_transform) {
        auto logged = features::log_transform(work);
        eps = logged.epsilon;
        work = std::move(logged.values);
    }

    std::vector<double> out;
    switch (kind) {
    case ModelKind::seasonal_naive:
        out = baselines::seasonal_naive_forecast(work, opt.naive_period, horizon);
        break;
    case ModelKind::auto_ar:
        if (refit) fitted.ar = baselines::fit_auto_ar(work, opt.ar_grid);
        out = baselines::ar_forecast(fitted.ar, work, horizon);
        break;
    case ModelKind::holt_winters:
        if (refit)
            fitted.hw = baselines::holt_winters_fit(work, opt.hw_period);
        else
            fitted.hw = baselines::holt_winters_apply(work, opt.hw_period, fitted.hw.alpha,
                                                      fitted.hw.beta, fitted.hw.gamma);
        out = baselines::holt_winters_forecast(fitted.hw, horizon);
        break;
    }
    if (opt.log_transform) out = features::inverse_log_transform(out, eps);
    return out;
}

}  // namespace

baselines::ForecastMatrix forecast_windows(std::span<const double> series,
                                           const windowing::WindowSet& windows, ModelKind kind,
                                           const ModelOptions& options, std::size_t threads) {
    if (options.refit_stride < 1) throw std::invalid_argument("refit stride must be >= 1");
    const std::size_t W = windows.size();
    const std::size_t H = windows.horizon;
    baselines::ForecastMatrix m;
    m.label = std::string(model_name(kind));
    m.horizon = H;
    m.origins.resize(W);
    m.values.resize(W * H);
    for (std::size_t w = 0; w < W; ++w) {
        if (windows.windows[w].target.end > series.size())
            throw std::invalid_argument("window extends past the end of the series");
        m.origins[w] = windows.windows[w].target.begin;
    }

    // Blocks of refit_stride windows are independent units of work.
    const std::size_t blocks = (W + options.refit_stride - 1) / options.refit_stride;
    auto run_block = [&](std::size_t b) {
        Fitted fitted;
        const std::size_t begin = b * options.refit_stride;
        const std::size_t end = std::min(W, begin + options.refit_stride);
        for (std::size_t w = begin; w < end; ++w) {
            const auto& win = windows.windows[w];
            const auto f = forecast_one(series.subspan(win.input.begin, win.input.size()), H, kind,
                                        options, w == begin, fitted);
            std::copy(f.begin(), f.end(), m.values.begin() + static_cast<std::ptrdiff_t>(w * H));
        }
    };

    const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, blocks));
    if (n_threads == 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
        return m;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t b = t; b < blocks; b += n_threads) run_block(b);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return m;
}

}  // namespace spikeguard::forecasting
