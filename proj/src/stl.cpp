#include "spikeguard/stl.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <stdexcept>

#include "spikeguard/csv_util.hpp"
#include "spikeguard/simd/kernels.hpp"

namespace spikeguard::stl {
namespace {

std::size_t next_odd(double x) {
    auto v = static_cast<std::size_t>(std::ceil(x));
    if (v % 2 == 0) ++v;
    return v;
}

std::size_t ceil_div10(std::size_t span) { return std::max<std::size_t>(1, (span + 9) / 10); }

// Window [lo, hi) of `span` nearest neighbours for point i in a series of n.
std::pair<std::size_t, std::size_t> neighbour_window(std::size_t i, std::size_t n,
                                                     std::size_t span) {
    if (span >= n) return {0, n};
    const std::size_t half = (span + 1) / 2;
    std::size_t lo = i + 1 >= half ? i + 1 - half : 0;
    lo = std::min(lo, n - span);
    return {lo, lo + span};
}

// Smoother without the span <= length restriction; spans longer than the
// series widen the bandwidth instead, as in the classic STL code.
std::vector<double> smooth(std::span<const double> y, std::size_t span, int degree,
                           std::span<const double> rw, std::size_t jump) {
    const std::size_t n = y.size();
    std::vector<double> out(n);
    if (n < 2) {
        std::copy(y.begin(), y.end(), out.begin());
        return out;
    }
    const std::size_t step = std::min(jump, n - 1);
    // When every robustness weight in the window is zero the window grows
    // until it reaches weighted points; the raw value is the last resort.
    auto fit_at = [&](std::size_t i) {
        for (std::size_t s = span;; s = 2 * s + 1) {
            const auto [lo, hi] = neighbour_window(i, n, s);
            double v = 0.0;
            if (loess_estimate(y, rw, s, degree, static_cast<double>(i), lo, hi, v)) {
                out[i] = v;
                return;
            }
            if (rw.empty() || s >= n) break;
        }
        out[i] = y[i];
    };
    std::size_t last = 0;
    for (std::size_t i = 0; i < n; i += step) {
        fit_at(i);
        last = i;
    }
    if (step > 1) {
        for (std::size_t i = 0; i + step <= last; i += step) {
            const double delta = (out[i + step] - out[i]) / static_cast<double>(step);
            for (std::size_t k = 1; k < step; ++k) out[i + k] = out[i] + delta * static_cast<double>(k);
        }
        if (last != n - 1) {
            fit_at(n - 1);
            const double delta = (out[n - 1] - out[last]) / static_cast<double>(n - 1 - last);
            for (std::size_t k = last + 1; k < n - 1; ++k)
                out[k] = out[last] + delta * static_cast<double>(k - last);
        }
    }
    return out;
}

void moving_average(std::span<const double> x, std::size_t len, std::vector<double>& out) {
    const std::size_t m = x.size() - len + 1;
    out.assign(m, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) sum += x[i];
    const double inv = 1.0 / static_cast<double>(len);
    out[0] = sum * inv;
    for (std::size_t i = 1; i < m; ++i) {
        sum += x[i + len - 1] - x[i - 1];
        out[i] = sum * inv;
    }
}

// Smooths every cycle-subseries and extends each by one period at both ends.
// Result has length n + 2 * period.
std::vector<double> cycle_subseries(std::span<const double> detrended, std::span<const double> rw,
                                    const StlParams& p) {
    const std::size_t n = detrended.size();
    const std::size_t np = p.period;
    std::vector<double> c(n + 2 * np, 0.0);
    std::vector<double> sub, subrw;
    for (std::size_t j = 0; j < np; ++j) {
        const std::size_t k = (n - j - 1) / np + 1;
        sub.resize(k);
        for (std::size_t m = 0; m < k; ++m) sub[m] = detrended[m * np + j];
        std::span<const double> sub_weights;
        if (!rw.empty()) {
            subrw.resize(k);
            for (std::size_t m = 0; m < k; ++m) subrw[m] = rw[m * np + j];
            sub_weights = subrw;
        }
        const auto smoothed = smooth(sub, p.seasonal_span, p.loess_degree, sub_weights,
                                     p.seasonal_jump);
        double before = 0.0;
        if (!loess_estimate(sub, sub_weights, p.seasonal_span, p.loess_degree, -1.0, 0,
                            std::min(p.seasonal_span, k), before))
            before = smoothed.front();
        double after = 0.0;
        const std::size_t lo = k > p.seasonal_span ? k - p.seasonal_span : 0;
        if (!loess_estimate(sub, sub_weights, p.seasonal_span, p.loess_degree,
                            static_cast<double>(k), lo, k, after))
            after = smoothed.back();
        c[j] = before;
        for (std::size_t m = 0; m < k; ++m) c[(m + 1) * np + j] = smoothed[m];
        c[(k + 1) * np + j] = after;
    }
    return c;
}

std::vector<double> low_pass(std::span<const double> c, const StlParams& p) {
    std::vector<double> a, b;
    moving_average(c, p.period, a);
    moving_average(a, p.period, b);
    moving_average(b, 3, a);
    return smooth(a, p.low_pass_span, p.loess_degree, {}, p.low_pass_jump);
}

std::vector<double> bisquare_weights(std::span<const double> y, std::span<const double> fit) {
    const std::size_t n = y.size();
    std::vector<double> r(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = std::fabs(y[i] - fit[i]);
        scale = std::max(scale, std::fabs(y[i]));
    }
    std::vector<double> sorted = r;
    const std::size_t m1 = n / 2;
    const std::size_t m0 = n - m1 - 1;
    std::nth_element(sorted.begin(), sorted.begin() + m1, sorted.end());
    const double hi = sorted[m1];
    std::nth_element(sorted.begin(), sorted.begin() + m0, sorted.begin() + m1 + 1);
    const double median = 0.5 * (sorted[m0] + hi);
    // Exact fits leave a median residual of pure rounding noise; floor it so
    // those points keep full weight.
    const double cmad = std::max(6.0 * median, std::max(1e-9 * scale, DBL_MIN));
    const double c9 = 0.999 * cmad;
    const double c1 = 0.001 * cmad;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (r[i] <= c1) {
            w[i] = 1.0;
        } else if (r[i] <= c9) {
            const double u = r[i] / cmad;
            const double t = 1.0 - u * u;
            w[i] = t * t;
        } else {
            w[i] = 0.0;
        }
    }
    return w;
}

}  // namespace

StlParams StlParams::defaults(std::size_t period, std::size_t seasonal_span) {
    StlParams p;
    p.period = period;
    p.seasonal_span = seasonal_span;
    p.trend_span = next_odd(1.5 * static_cast<double>(period) /
                            (1.0 - 1.5 / static_cast<double>(seasonal_span)));
    p.low_pass_span = next_odd(static_cast<double>(period));
    p.seasonal_jump = ceil_div10(p.seasonal_span);
    p.trend_jump = ceil_div10(p.trend_span);
    p.low_pass_jump = ceil_div10(p.low_pass_span);
    return p;
}

void StlParams::validate() const {
    if (period < 2) throw std::invalid_argument("STL period must be >= 2");
    if (seasonal_span < 7 || seasonal_span % 2 == 0)
        throw std::invalid_argument("seasonal span must be odd and >= 7");
    if (trend_span <= period || trend_span % 2 == 0)
        throw std::invalid_argument("trend span must be odd and greater than the period");
    if (low_pass_span < period || low_pass_span % 2 == 0)
        throw std::invalid_argument("low-pass span must be odd and at least the period");
    if (inner_iterations < 1) throw std::invalid_argument("inner iterations must be >= 1");
    if (robust_iterations < 0) throw std::invalid_argument("robust iterations must be >= 0");
    if (loess_degree != 0 && loess_degree != 1)
        throw std::invalid_argument("LOESS degree must be 0 or 1");
    if (seasonal_jump < 1 || trend_jump < 1 || low_pass_jump < 1)
        throw std::invalid_argument("smoother jumps must be >= 1");
}

bool loess_estimate(std::span<const double> values, std::span<const double> robustness_weights,
                    std::size_t span, int degree, double position, std::size_t lo,
                    std::size_t hi, double& fitted) {
    const std::size_t n = values.size();
    double h = std::max(position - static_cast<double>(lo),
                        static_cast<double>(hi) - 1.0 - position);
    if (span > n) h += static_cast<double>((span - n) / 2);
    h = std::max(h, DBL_MIN);
    const auto m =
        simd::kernels().local_moments(values, robustness_weights, lo, hi, position, h);
    if (!(m.sw > 0.0)) return false;
    const double mean_x = m.swx / m.sw;
    const double mean_y = m.swy / m.sw;
    double fit = mean_y;
    if (degree == 1) {
        const double var_x = m.swxx / m.sw - mean_x * mean_x;
        const double range = static_cast<double>(n - 1);
        if (var_x > 0.0 && std::sqrt(var_x) > 0.001 * range) {
            const double cov = m.swxy / m.sw - mean_x * mean_y;
            fit = mean_y - mean_x * cov / var_x;
        }
    }
    fitted = fit;
    return true;
}

std::vector<double> loess_smooth(std::span<const double> values, std::size_t span, int degree,
                                 std::span<const double> robustness_weights, std::size_t jump) {
    if (span % 2 == 0) throw std::invalid_argument("LOESS span must be odd");
    if (span > values.size())
        throw std::invalid_argument("LOESS span " + std::to_string(span) +
                                    " exceeds series length " + std::to_string(values.size()));
    if (degree != 0 && degree != 1) throw std::invalid_argument("LOESS degree must be 0 or 1");
    if (jump < 1) throw std::invalid_argument("LOESS jump must be >= 1");
    if (!robustness_weights.empty()) {
        if (robustness_weights.size() != values.size())
            throw std::invalid_argument("robustness weights length mismatch");
        for (double w : robustness_weights)
            if (!(w >= 0.0 && w <= 1.0))
                throw std::invalid_argument("robustness weights must lie in [0, 1]");
    }
    return smooth(values, span, degree, robustness_weights, jump);
}

DecompositionResult stl_decompose(std::span<const double> values, const StlParams& params) {
    params.validate();
    const std::size_t n = values.size();
    if (n < 2 * params.period)
        throw std::invalid_argument("series of length " + std::to_string(n) +
                                    " is shorter than two periods of " +
                                    std::to_string(params.period));

    DecompositionResult out;
    out.seasonal.assign(n, 0.0);
    out.trend.assign(n, 0.0);
    std::vector<double> rw;
    std::vector<double> work(n);

    for (int outer = 0; outer <= params.robust_iterations; ++outer) {
        for (int inner = 0; inner < params.inner_iterations; ++inner) {
            for (std::size_t i = 0; i < n; ++i) work[i] = values[i] - out.trend[i];
            const auto c = cycle_subseries(work, rw, params);
            const auto lp = low_pass(c, params);
            for (std::size_t i = 0; i < n; ++i) out.seasonal[i] = c[params.period + i] - lp[i];
            for (std::size_t i = 0; i < n; ++i) work[i] = values[i] - out.seasonal[i];
            out.trend = smooth(work, params.trend_span, params.loess_degree, rw,
                               params.trend_jump);
        }
        if (outer < params.robust_iterations) {
            for (std::size_t i = 0; i < n; ++i) work[i] = out.seasonal[i] + out.trend[i];
            rw = bisquare_weights(values, work);
        }
    }

    out.remainder.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.remainder[i] = values[i] - out.seasonal[i] - out.trend[i];
    out.robustness_weights = rw.empty() ? std::vector<double>(n, 1.0) : std::move(rw);
    return out;
}

MultiSeasonalResult multi_seasonal_decompose(std::span<const double> values,
                                             std::span<const StlParams> params,
                                             std::size_t iterations) {
    if (params.empty()) throw std::invalid_argument("at least one period is required");
    if (iterations < 1) throw std::invalid_argument("at least one iteration is required");
    for (std::size_t i = 1; i < params.size(); ++i)
        if (params[i].period <= params[i - 1].period)
            throw std::invalid_argument("periods must be strictly ascending");

    const std::size_t n = values.size();
    const std::size_t k = params.size();
    MultiSeasonalResult out;
    out.per_period.resize(k);
    out.stage_inputs.resize(k);
    std::vector<std::vector<double>> seasonal(k, std::vector<double>(n, 0.0));
    std::vector<double> residual(values.begin(), values.end());
    if (k == 1) iterations = 1;  // nothing to separate from
    for (std::size_t it = 0; it < iterations; ++it) {
        for (std::size_t j = 0; j < k; ++j) {
            // Put this period's current estimate back before refitting it.
            for (std::size_t i = 0; i < n; ++i) residual[i] += seasonal[j][i];
            out.stage_inputs[j] = residual;
            out.per_period[j] = stl_decompose(residual, params[j]);
            seasonal[j] = out.per_period[j].seasonal;
            for (std::size_t i = 0; i < n; ++i) residual[i] -= seasonal[j][i];
        }
    }
    out.seasonal_total.assign(n, 0.0);
    for (const auto& s : seasonal)
        for (std::size_t i = 0; i < n; ++i) out.seasonal_total[i] += s[i];
    out.deseasonalized.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.deseasonalized[i] = values[i] - out.seasonal_total[i];
    return out;
}

MultiSeasonalResult multi_seasonal_decompose(const series::TimeSeries& series,
                                             std::span<const std::size_t> periods,
                                             std::size_t iterations) {
    std::vector<StlParams> params;
    for (auto p : periods) params.push_back(StlParams::defaults(p));
    return multi_seasonal_decompose(series.values(), params, iterations);
}

std::string to_csv(std::span<const double> observed, const DecompositionResult& result) {
    std::string out = "index,observed,seasonal,trend,remainder\n";
    for (std::size_t i = 0; i < observed.size(); ++i) {
        out += std::to_string(i);
        for (double v : {observed[i], result.seasonal[i], result.trend[i], result.remainder[i]}) {
            out += ',';
            out += csv::format_double(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace spikeguard::stl
