#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spikeguard/stl.hpp"
#include "test_support.hpp"

using namespace spikeguard::stl;

namespace {

double sine(std::size_t i, double period) {
    return std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period);
}

// Direct weighted least squares for one LOESS point: tricube weights over the
// `span` nearest neighbours, intercept (+ slope) solved from the normal
// equations in long double.
double wls_point(const std::vector<double>& y, std::size_t i, std::size_t span, int degree) {
    const std::size_t n = y.size();
    std::size_t lo = i >= span / 2 ? i - span / 2 : 0;
    lo = std::min(lo, n - span);
    const std::size_t hi = lo + span;
    const long double h = std::max<long double>(i - lo, hi - 1 - i);
    long double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    for (std::size_t j = lo; j < hi; ++j) {
        const long double x = static_cast<long double>(j) - static_cast<long double>(i);
        const long double u = std::fabs(x) / h;
        long double w;
        if (u <= 0.001L) w = 1;
        else if (u >= 0.999L) w = 0;
        else w = std::pow(1 - u * u * u, 3);
        s0 += w;
        s1 += w * x;
        s2 += w * x * x;
        t0 += w * y[j];
        t1 += w * x * y[j];
    }
    if (degree == 0) return static_cast<double>(t0 / s0);
    // [s0 s1; s1 s2] [b0; b1] = [t0; t1]
    const long double det = s0 * s2 - s1 * s1;
    return static_cast<double>((t0 * s2 - s1 * t1) / det);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace

TEST_CASE("loess: constant and affine inputs are reproduced") {
    const std::vector<double> c(5, 5.0);
    for (std::size_t span : {1u, 3u, 5u})
        for (int degree : {0, 1}) {
            const auto s = loess_smooth(c, span, degree);
            for (double v : s) CHECK(v == doctest::Approx(5.0).epsilon(1e-14));
        }
    std::vector<double> line(40);
    for (std::size_t i = 0; i < line.size(); ++i) line[i] = 2.0 * static_cast<double>(i);
    for (std::size_t span : {3u, 7u, 15u, 39u}) {
        const auto s = loess_smooth(line, span, 1);
        for (std::size_t i = 0; i < line.size(); ++i) CHECK(s[i] == doctest::Approx(line[i]).epsilon(1e-12));
    }
}

TEST_CASE("loess: matches a direct weighted-least-squares oracle") {
    auto noise = test_support::gaussian(21, 42, 0.3);
    std::vector<double> y(21);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(0.4 * static_cast<double>(i)) + noise[i];
    for (int degree : {0, 1}) {
        const auto s = loess_smooth(y, 7, degree);
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::fabs(s[i] - wls_point(y, i, 7, degree)) < 1e-10);
    }
    // Longer series with a wider span.
    const auto z = test_support::gaussian(300, 5, 2.0);
    const auto s = loess_smooth(z, 31, 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) worst = std::max(worst, std::fabs(s[i] - wls_point(z, i, 31, 1)));
    CHECK(worst < 1e-10);
}

TEST_CASE("loess: shift invariance and unit robustness weights") {
    const auto y = test_support::gaussian(200, 9, 3.0);
    std::vector<double> shifted(y);
    for (auto& v : shifted) v += 1234.5;
    const auto a = loess_smooth(y, 15, 1);
    const auto b = loess_smooth(shifted, 15, 1);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::fabs(b[i] - a[i] - 1234.5) < 1e-9);

    const std::vector<double> ones(y.size(), 1.0);
    for (std::size_t jump : {1u, 3u}) {
        const auto plain = loess_smooth(y, 15, 1, {}, jump);
        const auto weighted = loess_smooth(y, 15, 1, ones, jump);
        CHECK(plain == weighted);  // bit-for-bit
    }
}

TEST_CASE("loess: argument errors") {
    const std::vector<double> y(10, 1.0);
    CHECK_THROWS_AS(loess_smooth(y, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(loess_smooth(y, 11, 1), std::invalid_argument);
    CHECK_THROWS_AS(loess_smooth(y, 5, 2), std::invalid_argument);
    CHECK_THROWS_AS(loess_smooth(y, 5, 1, std::vector<double>(9, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(loess_smooth(y, 5, 1, std::vector<double>(10, 1.5)), std::invalid_argument);
    CHECK_THROWS_AS(loess_smooth(y, 5, 1, {}, 0), std::invalid_argument);
}

TEST_CASE("StlParams defaults and validation") {
    const auto p = StlParams::defaults(336);
    CHECK(p.trend_span == 643);  // next odd >= 1.5 * 336 / (1 - 1.5 / 7) = 641.45...
    CHECK(p.low_pass_span == 337);
    CHECK(p.seasonal_jump == 1);
    CHECK(p.trend_jump == 65);
    CHECK_NOTHROW(p.validate());
    auto bad = p;
    bad.seasonal_span = 8;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.trend_span = 335;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(stl_decompose(std::vector<double>(600, 1.0), p), std::invalid_argument);
}

TEST_CASE("stl: pure sinusoid leaves a negligible remainder") {
    for (std::size_t period : {24u, 48u, 336u}) {
        const std::size_t cycles = period == 336 ? 8 : 6;
        std::vector<double> y(period * cycles);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = 10.0 * sine(i, static_cast<double>(period));
        const auto r = stl_decompose(y, StlParams::defaults(period));
        CHECK(max_abs(r.remainder) < 0.01 * 10.0);
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK(r.seasonal[i] + r.trend[i] + r.remainder[i] == doctest::Approx(y[i]).epsilon(1e-12));
    }
}

TEST_CASE("stl: constant series") {
    const std::vector<double> y(48 * 5, 42.0);
    const auto r = stl_decompose(y, StlParams::defaults(48));
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(std::fabs(r.seasonal[i]) < 1e-6);
        CHECK(std::fabs(r.trend[i] - 42.0) < 1e-6);
        CHECK(std::fabs(r.remainder[i]) < 1e-6);
    }
}

TEST_CASE("stl: sinusoid plus linear trend recovers the line") {
    const std::size_t period = 48, n = 48 * 12;
    std::vector<double> y(n), line(n);
    for (std::size_t i = 0; i < n; ++i) {
        line[i] = 100.0 + 0.05 * static_cast<double>(i);
        y[i] = line[i] + 8.0 * sine(i, period);
    }
    const auto r = stl_decompose(y, StlParams::defaults(period));
    double se = 0.0, ss = 0.0;
    const std::size_t lo = n / 10, hi = n - n / 10;
    for (std::size_t i = lo; i < hi; ++i) {
        se += (r.trend[i] - line[i]) * (r.trend[i] - line[i]);
        ss += line[i] * line[i];
    }
    CHECK(std::sqrt(se / ss) < 0.02);
    CHECK(std::sqrt(se / static_cast<double>(hi - lo)) < 0.02 * (line[hi] - line[lo]));
}

TEST_CASE("stl: robustness weights downweight an outlier") {
    auto y = test_support::gaussian(48 * 10, 17, 0.5);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 5.0 * sine(i, 48.0);
    y[100] += 500.0;
    auto p = StlParams::defaults(48);
    CHECK(stl_decompose(y, p).robustness_weights[100] == 1.0);  // not robust by default
    p.robust_iterations = 1;
    const auto r = stl_decompose(y, p);
    CHECK(r.robustness_weights[100] < 0.01);
    // The first fit smears the outlier over its own cycle-subseries and the
    // edge cycles; well past it the weights stay high.
    std::size_t far = 0, kept = 0;
    for (std::size_t i = 100 + 2 * 48; i < y.size(); ++i, ++far) kept += r.robustness_weights[i] > 0.5;
    CHECK(static_cast<double>(kept) >= 0.9 * static_cast<double>(far));
    CHECK(r.remainder[100] > 400.0);
}

TEST_CASE("multi-seasonal: two tones, additive identity, single-period reduction") {
    const std::size_t n = 1440 * 4;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 10.0 * sine(i, 336.0) + 8.0 * sine(i, 1440.0);
    const std::vector<StlParams> params{StlParams::defaults(336), StlParams::defaults(1440)};
    const auto m = multi_seasonal_decompose(y, params);
    CHECK(max_abs(m.deseasonalized) < 0.02 * 18.0);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::fabs(m.seasonal_total[i] + m.deseasonalized[i] - y[i]) <= 1e-8 * std::max(1.0, std::fabs(y[i])));
    REQUIRE(m.per_period.size() == 2);
    REQUIRE(m.stage_inputs.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& d = m.per_period[k];
        for (std::size_t i = 0; i < n; i += 7)
            CHECK(d.seasonal[i] + d.trend[i] + d.remainder[i] == doctest::Approx(m.stage_inputs[k][i]).epsilon(1e-12));
    }
    CHECK(multi_seasonal_decompose(y, params, 1).stage_inputs[0] == y);
    CHECK_THROWS_AS(multi_seasonal_decompose(y, params, 0), std::invalid_argument);

    const std::vector<StlParams> one{StlParams::defaults(336)};
    const auto single = multi_seasonal_decompose(y, one);
    const auto direct = stl_decompose(y, one[0]);
    CHECK(single.per_period[0].seasonal == direct.seasonal);
    CHECK(single.per_period[0].trend == direct.trend);

    const std::vector<StlParams> descending{StlParams::defaults(1440), StlParams::defaults(336)};
    CHECK_THROWS_AS(multi_seasonal_decompose(y, descending), std::invalid_argument);
}

TEST_CASE("stl: additive identity on random and structured fixtures") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto y = test_support::gaussian(48 * 8, seed, 10.0);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += 50.0 * sine(i, 48.0) + (seed % 2 ? 1e4 : 0.0);
        const auto r = stl_decompose(y, StlParams::defaults(48));
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK(std::fabs(r.seasonal[i] + r.trend[i] + r.remainder[i] - y[i]) <= 1e-8 * std::max(1.0, std::fabs(y[i])));
    }
}

TEST_CASE("decomposition CSV layout") {
    std::vector<double> y(96);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = sine(i, 24.0);
    const auto r = stl_decompose(y, StlParams::defaults(24));
    const auto text = to_csv(y, r);
    CHECK(text.rfind("index,observed,seasonal,trend,remainder\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 97);
}
