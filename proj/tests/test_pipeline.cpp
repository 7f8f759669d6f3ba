#include <doctest.h>

#include <filesystem>

#include "spikeguard/pipeline.hpp"
#include "spikeguard/synthetic.hpp"
#include "test_support.hpp"

using namespace spikeguard;
using namespace spikeguard::pipeline;
using test_support::read_text;
using test_support::TempDir;
using test_support::write_text;
namespace fs = std::filesystem;

namespace {

synthetic::Fixture write_fixture(const TempDir& dir, std::size_t length, std::uint64_t seed) {
    synthetic::FixtureOptions o;
    o.length = length;
    auto fx = synthetic::make_price_fixture(o, seed);
    write_text(dir / "input.csv", series::to_csv(fx.observed, fx.exogenous));
    write_text(dir / "actuals.csv", series::to_csv(fx.clean, fx.exogenous));
    return fx;
}

PipelineConfig small_config(const TempDir& dir) {
    return PipelineConfig::from_text("input = " + (dir / "input.csv").string() + "\n" +
                                     "output_dir = " + (dir / "out").string() + "\n" +
                                     "regularize = off\n"
                                     "split = 0.7,0.1,0.2\n"
                                     "lookback = 48\n"
                                     "horizon = 24\n"
                                     "naive_period = 48\n"
                                     "hw_period = 24\n"
                                     "lag_offsets = 1,2,48\n");
}

}  // namespace

TEST_CASE("config parsing, validation and hashing") {
    auto cfg = PipelineConfig::from_text("# comment\nlambda = 2.5\nperiod = 48,336\nmodel = auto_ar,seasonal_naive\n");
    CHECK(cfg.lambda == 2.5);
    CHECK(cfg.periods == std::vector<std::size_t>{48, 336});
    CHECK(cfg.models.size() == 2);
    CHECK_THROWS_AS(PipelineConfig::from_text("lamda = 3\n"), std::invalid_argument);
    CHECK_THROWS_AS(PipelineConfig::from_text("lambda = abc\n"), std::invalid_argument);
    CHECK_THROWS_AS(PipelineConfig::from_text("just a line\n"), std::invalid_argument);
    CHECK_THROWS_AS(PipelineConfig::from_text("regularize = maybe\n"), std::invalid_argument);

    PipelineConfig a, b;
    CHECK(a.hash() == b.hash());
    b.set("lookback", "256");
    CHECK(a.hash() != b.hash());
    CHECK(PipelineConfig::from_text(a.canonical_text()).canonical_text() == a.canonical_text());

    const auto& keys = PipelineConfig::keys();
    CHECK(std::is_sorted(keys.begin(), keys.end()));
    for (const auto& k : {"input", "lambda", "period", "lookback", "horizon", "stride", "split", "model",
                          "log_price", "features", "regularize", "threads", "seed"})
        CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());

    PipelineConfig bad;
    bad.input = "x.csv";
    bad.models = {"arima"};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.models = {"seasonal_naive"};
    bad.naive_period = 1000;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("smoke run on a 10-day fixture") {
    TempDir dir;
    write_fixture(dir, 480, 3);
    const auto summary = run_pipeline(small_config(dir));
    const auto csv = read_text(dir / "out" / "raw" / "metrics.csv");
    CHECK(csv.rfind("model,variant,mae,mape_pct,rmse,n,guarded_terms\n", 0) == 0);
    const auto& reports = summary.metrics.at("raw");
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].n > 0);
    CHECK(std::isfinite(reports[0].mape));
    CHECK(fs::exists(dir / "out" / "manifest.txt"));
    CHECK(fs::exists(dir / "out" / "split.csv"));
    CHECK_FALSE(fs::exists(dir / "out" / "INCOMPLETE"));
}

TEST_CASE("runs are byte-identical across repeats and thread counts") {
    TempDir dir;
    write_fixture(dir, 8000, 8);
    auto cfg = small_config(dir);
    cfg.set("regularize", "on");
    cfg.set("lookback", "512");
    cfg.set("horizon", "48");
    cfg.set("naive_period", "336");
    cfg.set("hw_period", "48");
    cfg.set("model", "seasonal_naive,auto_ar,holt_winters");
    cfg.set("stride", "8");
    std::string first;
    for (const char* threads : {"1", "1", "8"}) {
        cfg.set("threads", threads);
        run_pipeline(cfg);
        const auto text = read_text(dir / "out" / "regularized" / "metrics.csv") +
                          read_text(dir / "out" / "regularized" / "metrics_per_horizon.csv");
        if (first.empty()) first = text;
        CHECK(text == first);
    }
}

TEST_CASE("regularization improves MAPE on a spike fixture") {
    TempDir dir;
    write_fixture(dir, 8000, 11);
    auto cfg = small_config(dir);
    cfg.set("regularize", "both");
    cfg.set("actuals", (dir / "actuals.csv").string());
    cfg.set("lookback", "512");
    cfg.set("horizon", "48");
    cfg.set("naive_period", "336");
    cfg.set("model", "seasonal_naive,auto_ar");
    cfg.set("stride", "16");
    const auto summary = run_pipeline(cfg);
    REQUIRE(summary.improvement.has_value());
    CHECK(summary.improvement->rows.size() == 2);
    CHECK(summary.improvement->average_improvement_pct > 0.0);
    CHECK(fs::exists(dir / "out" / "improvement.csv"));
    CHECK(fs::exists(dir / "out" / "spike_report.csv"));
}

TEST_CASE("a failing stage removes its artifacts and marks the run incomplete") {
    TempDir dir;
    write_fixture(dir, 480, 3);
    auto cfg = small_config(dir);
    cfg.set("lookback", "90");  // leaves no test windows
    try {
        run_pipeline(cfg);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "split");
    }
    CHECK(fs::exists(dir / "out" / "INCOMPLETE"));
    CHECK_FALSE(fs::exists(dir / "out" / "series.csv"));

    // A later successful run clears the marker.
    run_pipeline(small_config(dir));
    CHECK_FALSE(fs::exists(dir / "out" / "INCOMPLETE"));

    cfg = small_config(dir);
    cfg.input = dir / "missing.csv";
    CHECK_THROWS_AS(run_pipeline(cfg), StageError);
}

TEST_CASE("output directory falls back to the environment") {
    CHECK(resolve_output_dir("given") == fs::path("given"));
    ::setenv("SPIKEGUARD_OUTPUT_DIR", "from_env", 1);
    CHECK(resolve_output_dir({}) == fs::path("from_env"));
    ::unsetenv("SPIKEGUARD_OUTPUT_DIR");
    CHECK_THROWS(resolve_output_dir({}));
}
