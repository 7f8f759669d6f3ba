#include <doctest.h>

#include <cmath>
#include <random>

#include "spikeguard/baselines.hpp"
#include "spikeguard/evaluation.hpp"
#include "test_support.hpp"

using namespace spikeguard::baselines;
using test_support::TempDir;
using test_support::write_text;

namespace {

std::vector<double> simulate_ar2(std::size_t n, std::uint64_t seed, double phi1, double phi2) {
    const auto e = test_support::gaussian(n + 200, seed);
    std::vector<double> x(n + 200, 0.0);
    for (std::size_t t = 2; t < x.size(); ++t) x[t] = phi1 * x[t - 1] + phi2 * x[t - 2] + e[t];
    return {x.begin() + 200, x.end()};
}

// Recomputes the AIC of a fitted model from its own coefficients, on the
// shared target sample [first, n).
double independent_aic(const std::vector<double>& y, const ArModel& m, std::size_t first) {
    std::vector<double> z(y);
    if (m.d == 1) {
        for (std::size_t i = z.size() - 1; i > 0; --i) z[i] = z[i] - z[i - 1];
        z[0] = 0.0;
    }
    long double rss = 0.0L;
    std::size_t n = 0;
    for (std::size_t t = first; t < z.size(); ++t, ++n) {
        long double pred = m.intercept;
        for (int k = 1; k <= m.p; ++k) pred += m.coefficients[k - 1] * z[t - k];
        const long double r = z[t] - pred;
        rss += r * r;
    }
    return static_cast<double>(n) * std::log(static_cast<double>(rss) / static_cast<double>(n)) +
           2.0 * (m.p + 1);
}

}  // namespace

TEST_CASE("seasonal naive examples") {
    const std::vector<double> lb{1, 3, 5, 7, 9};
    CHECK(seasonal_naive_forecast(lb, 2, 4) == std::vector<double>{7, 9, 7, 9});
    const auto x = test_support::gaussian(200, 3);
    const auto f = seasonal_naive_forecast(x, 48, 48);
    CHECK(f == std::vector<double>(x.end() - 48, x.end()));
    CHECK_THROWS_AS(seasonal_naive_forecast(lb, 0, 4), std::invalid_argument);
    CHECK_THROWS_AS(seasonal_naive_forecast(lb, 6, 4), std::invalid_argument);

    std::vector<double> periodic(336 * 4);
    for (std::size_t i = 0; i < periodic.size(); ++i)
        periodic[i] = 100.0 + 20.0 * std::sin(2.0 * M_PI * static_cast<double>(i % 336) / 336.0);
    const std::span<const double> all(periodic);
    const auto g = seasonal_naive_forecast(all.first(336 * 3), 336, 336);
    CHECK(spikeguard::eval::mape(all.subspan(336 * 3), g) == 0.0);
}

TEST_CASE("auto-AR recovers an AR(2) process") {
    // Plain AIC overfits now and then: seed 1 lands on p = 6 (about 1 in 5
    // seeds does), with the leading coefficients still on target.
    int small_order = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto y = simulate_ar2(5000, seed, 0.5, -0.3);
        const auto m = fit_auto_ar(y);
        CHECK(m.d == 0);
        CHECK(m.p >= 2);
        small_order += (m.p == 2 || m.p == 3) ? 1 : 0;
        CHECK(std::fabs(m.coefficients[0] - 0.5) <= 0.05);
        CHECK(std::fabs(m.coefficients[1] + 0.3) <= 0.05);
        CHECK(m.coefficients.size() == static_cast<std::size_t>(m.p));

        // Exhaustive re-check: no candidate has a smaller independently
        // recomputed AIC.
        const auto all = fit_ar_grid(y);
        CHECK(all.size() == 16);
        const double chosen = independent_aic(y, m, 9);
        CHECK(chosen == doctest::Approx(m.aic).epsilon(1e-9));
        for (const auto& c : all) CHECK(independent_aic(y, c, 9) >= chosen - 1e-6);
    }
    CHECK(small_order >= 4);
}

TEST_CASE("auto-AR on white noise picks a small order") {
    for (std::uint64_t seed = 10; seed < 15; ++seed) {
        const auto y = test_support::gaussian(5000, seed);
        const auto m = fit_auto_ar(y);
        CHECK(m.p <= 2);
        CHECK(m.d == 0);
        for (double c : m.coefficients) CHECK(std::fabs(c) <= 0.1);
    }
}

TEST_CASE("auto-AR on a random walk finds a unit root") {
    // AIC alone picks d = 1 in 3 of these 5 seeds (about a quarter over
    // 100 seeds): a levels AR(1) with phi just under 1 fits in-sample as well.
    // Either way the selected model carries the unit root.
    int differenced = 0;
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
        auto y = test_support::gaussian(5000, seed);
        for (std::size_t i = 1; i < y.size(); ++i) y[i] += y[i - 1];
        const auto m = fit_auto_ar(y);
        if (m.d == 1) {
            ++differenced;
            continue;
        }
        double persistence = 0.0;
        for (double c : m.coefficients) persistence += c;
        CHECK(persistence > 0.99);
    }
    CHECK(differenced >= 1);
}

TEST_CASE("AR forecast examples") {
    ArModel ar1;
    ar1.p = 1;
    ar1.coefficients = {0.5};
    const std::vector<double> lb{1, 2, 8};
    CHECK(ar_forecast(ar1, lb, 4) == std::vector<double>{4, 2, 1, 0.5});

    ArModel c;
    c.intercept = 3.25;
    CHECK(ar_forecast(c, lb, 3) == std::vector<double>{3.25, 3.25, 3.25});

    ArModel rw;
    rw.d = 1;
    CHECK(ar_forecast(rw, lb, 3) == std::vector<double>{8, 8, 8});

    ArModel big;
    big.p = 5;
    big.coefficients.assign(5, 0.1);
    CHECK_THROWS_AS(ar_forecast(big, lb, 3), std::invalid_argument);
    CHECK_THROWS_AS(fit_auto_ar(std::vector<double>(12, 1.0)), std::invalid_argument);
}

TEST_CASE("Holt-Winters on noiseless inputs") {
    const std::vector<double> flat(96, 42.0);
    for (double v : holt_winters_forecast(holt_winters_fit(flat, 48), 48)) CHECK(v == doctest::Approx(42.0).epsilon(1e-12));

    std::vector<double> line(96);
    for (std::size_t i = 0; i < line.size(); ++i) line[i] = 5.0 + 0.25 * static_cast<double>(i);
    const auto fl = holt_winters_forecast(holt_winters_fit(line, 12), 30);
    for (std::size_t h = 0; h < fl.size(); ++h) CHECK(std::fabs(fl[h] - (5.0 + 0.25 * static_cast<double>(96 + h))) < 1e-6);

    std::vector<double> square(40);
    for (std::size_t i = 0; i < square.size(); ++i) square[i] = (i % 4) < 2 ? 10.0 : -10.0;
    const auto fs = holt_winters_forecast(holt_winters_fit(square, 4), 12);
    for (std::size_t h = 0; h < fs.size(); ++h) CHECK(std::fabs(fs[h] - square[(40 + h) % 4]) < 1e-6);

    const auto m = holt_winters_fit(test_support::gaussian(200, 1), 24);
    for (double v : {m.alpha, m.beta, m.gamma}) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    CHECK_THROWS_AS(holt_winters_fit(flat, 60), std::invalid_argument);
    CHECK_THROWS_AS(holt_winters_apply(flat, 48, 1.0, 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("external predictions: shape, errors and round trip") {
    TempDir dir;
    std::string text = "window_start,h,prediction\n";
    for (int w : {100, 101})
        for (int h = 0; h < 48; ++h) text += std::to_string(w) + "," + std::to_string(h) + ",1.5\n";
    write_text(dir / "ok.csv", text);
    const auto m = load_external_predictions(dir / "ok.csv", 48);
    CHECK(m.windows() == 2);
    CHECK(m.values.size() == 96);
    const std::vector<std::size_t> known{100, 101};
    CHECK_NOTHROW(load_external_predictions(dir / "ok.csv", 48, std::span<const std::size_t>(known)));
    const std::vector<std::size_t> other{100, 200};
    CHECK_THROWS_AS(load_external_predictions(dir / "ok.csv", 48, std::span<const std::size_t>(other)),
                    std::invalid_argument);
    CHECK_THROWS_AS(load_external_predictions(dir / "ok.csv", 24), std::invalid_argument);

    const auto cut = text.substr(0, text.rfind("101,47,"));
    write_text(dir / "missing.csv", cut);
    CHECK_THROWS_AS(load_external_predictions(dir / "missing.csv", 48), std::invalid_argument);
    write_text(dir / "dup.csv", text + "100,3,2.0\n");
    CHECK_THROWS_AS(load_external_predictions(dir / "dup.csv", 48), std::invalid_argument);
    write_text(dir / "header.csv", "a,b,c\n");
    CHECK_THROWS_AS(load_external_predictions(dir / "header.csv", 48), std::invalid_argument);

    // Dump a seasonal-naive matrix with awkward doubles and reload it.
    const auto x = test_support::uniform(2000, 4, -50.0, 500.0);
    ForecastMatrix fm;
    fm.label = "seasonal_naive";
    fm.horizon = 48;
    for (std::size_t w = 0; w < 20; ++w) {
        const std::size_t origin = 600 + 7 * w;
        fm.origins.push_back(origin);
        const auto f = seasonal_naive_forecast(std::span<const double>(x).subspan(origin - 512, 512), 336, 48);
        fm.values.insert(fm.values.end(), f.begin(), f.end());
    }
    write_text(dir / "rt.csv", fm.to_csv());
    const auto back = load_external_predictions(dir / "rt.csv", 48, std::nullopt, "seasonal_naive");
    CHECK(back.origins == fm.origins);
    CHECK(back.values == fm.values);
    CHECK(back.label == "seasonal_naive");
}
