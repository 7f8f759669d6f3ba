#include <doctest.h>

#include <cmath>

#include "spikeguard/evaluation.hpp"
#include "test_support.hpp"

using namespace spikeguard;
using namespace spikeguard::eval;

namespace {

// Kahan-compensated long double oracle for the mean of |y - yhat|.
double kahan_mae(const std::vector<double>& y, const std::vector<double>& p) {
    long double sum = 0.0L, c = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const long double term = std::fabs(static_cast<long double>(y[i]) - p[i]) - c;
        const long double t = sum + term;
        c = (t - sum) - term;
        sum = t;
    }
    return static_cast<double>(sum / y.size());
}

MetricReport report(const std::string& model, double m) {
    MetricReport r;
    r.model = model;
    r.mape = m;
    return r;
}

}  // namespace

TEST_CASE("metric hand cases") {
    const std::vector<double> y{100, 200}, p{110, 190};
    CHECK(mae(y, p) == 10.0);
    CHECK(mape(y, p) == 7.5);
    CHECK(mae(y, y) == 0.0);
    CHECK(mape(y, y) == 0.0);
    CHECK(rmse(y, y) == 0.0);
    const std::vector<double> z{0, 0}, e{3, 4};
    CHECK(rmse(z, e) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));

    const std::vector<double> with_zero{0.0, 10.0}, pred{1.0, 10.0};
    const double guarded = mape(with_zero, pred);
    CHECK(std::isfinite(guarded));
    CHECK(guarded == doctest::Approx(100.0 * (1.0 / kMapeEpsilon) / 2.0));

    CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(rmse(y, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("metrics match an extended-precision oracle and obey their inequalities") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto y = test_support::uniform(1000, seed, 10.0, 500.0);
        const auto p = test_support::uniform(1000, seed + 1000, 10.0, 500.0);
        const double oracle = kahan_mae(y, p);
        CHECK(std::fabs(mae(y, p) - oracle) <= 1e-10 * oracle);
        CHECK(mae(y, p) <= rmse(y, p));
        auto ys = y, ps = p;
        for (auto& v : ys) v *= 37.5;
        for (auto& v : ps) v *= 37.5;
        CHECK(mape(ys, ps) == doctest::Approx(mape(y, p)).epsilon(1e-12));
    }
}

TEST_CASE("forecast matrix scoring") {
    std::vector<double> actual(20);
    for (std::size_t i = 0; i < actual.size(); ++i) actual[i] = 100.0 + static_cast<double>(i);

    baselines::ForecastMatrix perfect{"m", 2, {5}, {105, 106}};
    const auto r0 = score_forecasts(perfect, actual);
    CHECK(r0.mae == 0.0);
    CHECK(r0.mape == 0.0);
    CHECK(r0.rmse == 0.0);
    CHECK(r0.n == 2);

    // Errors: window 3 -> (+1, -3), window 10 -> (+2, +6).
    baselines::ForecastMatrix two{"m", 2, {3, 10}, {104, 101, 112, 117}};
    const auto r = score_forecasts(two, actual, "raw");
    CHECK(r.mae == 3.0);
    CHECK(r.rmse == doctest::Approx(std::sqrt((1.0 + 9.0 + 4.0 + 36.0) / 4.0)));
    CHECK(r.variant == "raw");
    REQUIRE(r.per_horizon_mae.size() == 2);
    CHECK(r.per_horizon_mae[0] == 1.5);
    CHECK(r.per_horizon_mae[1] == 4.5);
    CHECK((r.per_horizon_mae[0] + r.per_horizon_mae[1]) / 2.0 == r.mae);

    baselines::ForecastMatrix off_end{"m", 2, {19}, {1, 2}};
    CHECK_THROWS_AS(score_forecasts(off_end, actual), std::invalid_argument);
}

TEST_CASE("report CSV headers") {
    std::vector<MetricReport> rs{report("seasonal_naive", 12.5)};
    rs[0].variant = "raw";
    rs[0].per_horizon_mae = {1.0};
    rs[0].per_horizon_mape = {2.0};
    rs[0].per_horizon_rmse = {3.0};
    CHECK(metrics_csv(rs).rfind("model,variant,mae,mape_pct,rmse,n,guarded_terms\n", 0) == 0);
    CHECK(per_horizon_csv(rs) == "model,variant,h,mae,mape_pct,rmse\nseasonal_naive,raw,0,1,2,3\n");
    CHECK(metrics_table(rs).find("seasonal_naive") != std::string::npos);
}

TEST_CASE("improvement report") {
    const std::vector<MetricReport> raw{report("a", 20.0), report("b", 10.0), report("c", 8.0)};
    const std::vector<MetricReport> reg{report("c", 10.0), report("a", 10.0), report("b", 10.0)};
    const auto imp = improvement_report(raw, reg);
    REQUIRE(imp.rows.size() == 3);
    CHECK(imp.rows[0].model == "a");
    CHECK(imp.rows[0].improvement_pct == 50.0);
    CHECK(imp.rows[1].improvement_pct == 0.0);
    CHECK(imp.rows[2].improvement_pct == -25.0);
    CHECK(imp.average_improvement_pct == doctest::Approx(25.0 / 3.0));
    CHECK(imp.to_csv().rfind("model,mape_raw_pct,mape_regularized_pct,improvement_pct\n", 0) == 0);

    const std::vector<MetricReport> partial{report("a", 1.0)};
    CHECK_THROWS_AS(improvement_report(raw, partial), std::invalid_argument);
}
