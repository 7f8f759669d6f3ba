// spikeguard command-line entry point. Every subcommand runs one stage
// through the same functions run_pipeline uses; `pipeline` runs them all.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "spikeguard/csv_util.hpp"
#include "spikeguard/pipeline.hpp"
#include "spikeguard/synthetic.hpp"

namespace fs = std::filesystem;
namespace sg = spikeguard;
namespace pl = spikeguard::pipeline;

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string flag_name(const std::string& key) {
    std::string f = "--" + key;
    for (auto& c : f)
        if (c == '_') c = '-';
    return f;
}

// Collects config keys given as flags; applied over the config file after parsing.
class KeyFlags {
public:
    KeyFlags(CLI::App* app, const std::vector<std::string>& keys) {
        app->add_option("--config", config_file_, "flat key = value config file");
        for (const auto& k : keys) {
            auto& slot = values_[k];
            if (k == "regularize" || k == "log_price" || k == "warmup_overlap") {
                // A bare flag means "on".
                app->add_option(flag_name(k), slot.emplace_back(),
                                k == "warmup_overlap" ? "off | on" : "off | on | both")
                    ->expected(0, 1)
                    ->default_str("on")
                    ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            } else if (k == "period" || k == "model") {
                app->add_option(flag_name(k), slot, "repeatable");
            } else {
                app->add_option(flag_name(k), slot.emplace_back())
                    ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            }
        }
        app_ = app;
    }

    pl::PipelineConfig build() const {
        pl::PipelineConfig cfg;
        try {
            if (!config_file_.empty()) cfg = pl::PipelineConfig::from_file(config_file_);
            for (const auto& [key, vals] : values_) {
                if (app_->count(flag_name(key)) == 0) continue;
                std::string joined;
                for (const auto& v : vals) joined += (joined.empty() ? "" : ",") + v;
                cfg.set(key, joined);
            }
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return cfg;
    }

private:
    CLI::App* app_ = nullptr;
    std::string config_file_;
    std::map<std::string, std::vector<std::string>> values_;
};

fs::path output_dir(const pl::PipelineConfig& cfg) {
    try {
        return pl::resolve_output_dir(cfg.output_dir);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

// Loads any input-format CSV, filling gaps the way ingest does.
pl::IngestResult load(const fs::path& path, const pl::PipelineConfig& cfg) {
    if (path.empty()) throw UsageError("--input is required");
    auto in = sg::series::ingest_csv(path, cfg.schema);
    pl::IngestResult r{in.price, in.exogenous, in.report};
    if (!in.report.gaps.empty()) {
        r.exogenous = sg::series::fill_gaps(in.exogenous, in.price, in.report, cfg.fill, cfg.max_gap);
        r.price = sg::series::fill_gaps(in.price, in.report, cfg.fill, cfg.max_gap);
    }
    return r;
}

void report_written(const pl::ArtifactWriter& out) {
    for (const auto& p : out.written()) std::cout << "wrote " << (out.root() / p).string() << "\n";
}

const std::vector<std::string> kSchemaKeys{"timestamp_column", "price_column",    "demand_column",
                                           "temperature_column", "humidity_column", "heat_index_column",
                                           "holiday_column",   "fill",            "max_gap"};

std::vector<std::string> with_schema(std::vector<std::string> keys) {
    keys.insert(keys.end(), kSchemaKeys.begin(), kSchemaKeys.end());
    return keys;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spikeguard: spike regularization and baseline forecasting for half-hourly prices"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pl::kVersion));

    auto* ingest = app.add_subcommand("ingest", "read a price CSV, fill gaps, write series.csv");
    KeyFlags ingest_keys(ingest, with_schema({"input", "output_dir"}));

    auto* decompose = app.add_subcommand("decompose", "multi-period STL decomposition");
    KeyFlags decompose_keys(decompose, with_schema({"input", "output_dir", "period"}));

    auto* regularize = app.add_subcommand("regularize", "detect spikes and replace them");
    KeyFlags regularize_keys(regularize,
                             with_schema({"input", "output_dir", "lambda", "period", "huber_delta"}));
    std::string regularize_out;
    regularize->add_option("--out", regularize_out, "regularized series path (default <output-dir>/regularized.csv)");

    auto* featurize = app.add_subcommand("featurize", "lag, calendar and exogenous feature frame");
    KeyFlags featurize_keys(featurize, with_schema({"input", "output_dir", "log_price", "features",
                                                    "lag_offsets", "price_counting", "split"}));

    auto* split = app.add_subcommand("split", "chronological split and test window manifest");
    KeyFlags split_keys(split, with_schema({"input", "output_dir", "split", "lookback", "horizon",
                                            "stride", "warmup_overlap"}));
    std::size_t split_length = 0;
    split->add_option("--length", split_length, "series length (instead of --input)");

    auto* forecast = app.add_subcommand("forecast", "baseline forecasts over the test windows");
    KeyFlags forecast_keys(forecast,
                           with_schema({"input", "output_dir", "model", "split", "lookback", "horizon",
                                        "stride", "warmup_overlap", "log_price", "naive_period",
                                        "hw_period", "refit_stride", "threads"}));

    auto* score = app.add_subcommand("score", "MAE / MAPE / RMSE of forecast files");
    KeyFlags score_keys(score, with_schema({"actuals", "output_dir", "horizon"}));
    std::vector<std::string> predictions;
    std::string variant = "raw";
    score->add_option("--predictions", predictions, "window_start,h,prediction file (repeatable)")
        ->required();
    score->add_option("--variant", variant, "variant label written to the reports");

    auto* pipeline = app.add_subcommand("pipeline", "run every stage from a config");
    KeyFlags pipeline_keys(pipeline, pl::PipelineConfig::keys());

    auto* demo = app.add_subcommand("demo", "write a synthetic input with injected spikes");
    std::string demo_dir;
    std::size_t demo_length = 70'000;
    std::uint64_t demo_seed = 0;
    bool demo_heavy = false;
    demo->add_option("--output-dir", demo_dir)->required();
    demo->add_option("--length", demo_length);
    demo->add_option("--seed", demo_seed);
    demo->add_flag("--heavy-tailed", demo_heavy, "log-normal price with jumps instead of the spike fixture");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*ingest) {
            const auto cfg = ingest_keys.build();
            if (cfg.input.empty()) throw UsageError("--input is required");
            pl::ArtifactWriter out(output_dir(cfg));
            auto r = pl::stage_ingest(cfg.input, cfg.schema, cfg.fill, cfg.max_gap, out);
            std::cout << r.price.size() << " rows, " << r.gaps.gaps.size() << " gaps ("
                      << r.gaps.missing_count() << " missing), " << r.gaps.duplicate_timestamps.size()
                      << " duplicates\n";
            report_written(out);
        } else if (*decompose) {
            const auto cfg = decompose_keys.build();
            const auto data = load(cfg.input, cfg);
            pl::ArtifactWriter out(output_dir(cfg));
            pl::stage_decompose(data.price, cfg.periods, out);
            report_written(out);
        } else if (*regularize) {
            const auto cfg = regularize_keys.build();
            const auto data = load(cfg.input, cfg);
            fs::path root, name = "regularized.csv";
            if (!regularize_out.empty()) {
                const fs::path o(regularize_out);
                root = cfg.output_dir.empty() ? (o.has_parent_path() ? o.parent_path() : fs::path("."))
                                              : cfg.output_dir;
                name = cfg.output_dir.empty() ? o.filename() : o;
            } else {
                root = output_dir(cfg);
            }
            pl::ArtifactWriter out(root);
            const auto dcfg = pl::detector_config(cfg);
            const auto reg = pl::stage_regularize(data, dcfg, out, name);
            std::printf("%zu of %zu points flagged (%.3f%%)\n", reg.report.total(), data.price.size(),
                        100.0 * reg.report.fraction());
            report_written(out);
        } else if (*featurize) {
            const auto cfg = featurize_keys.build();
            const auto data = load(cfg.input, cfg);
            pl::ArtifactWriter out(output_dir(cfg));
            const auto frame = pl::stage_featurize(
                data, pl::feature_options(cfg, cfg.log_price != pl::Toggle::off), cfg.split, out);
            std::cout << frame.columns.size() << " feature columns, rows from " << frame.valid_from << "\n";
            report_written(out);
        } else if (*split) {
            const auto cfg = split_keys.build();
            std::size_t length = split_length;
            if (length == 0) length = load(cfg.input, cfg).price.size();
            pl::ArtifactWriter out(output_dir(cfg));
            const auto ws = pl::stage_split(length, cfg.split, cfg.lookback, cfg.horizon, cfg.stride,
                                            cfg.warmup_overlap, out);
            std::cout << ws.size() << " test windows\n";
            report_written(out);
        } else if (*forecast) {
            const auto cfg = forecast_keys.build();
            const auto data = load(cfg.input, cfg);
            pl::ArtifactWriter out(output_dir(cfg));
            const auto ranges = sg::windowing::chronological_split(data.price.size(), cfg.split);
            const auto ws = sg::windowing::test_windows(ranges, cfg.lookback, cfg.horizon, cfg.stride,
                                                        cfg.warmup_overlap);
            if (ws.size() == 0) throw std::invalid_argument("test segment holds no window");
            if (cfg.log_price == pl::Toggle::both) throw UsageError("--log-price must be on or off here");
            for (const auto& m : cfg.models)
                pl::stage_forecast(data.price.values(), ws, m,
                                   pl::model_options(cfg, cfg.log_price == pl::Toggle::on), cfg.threads,
                                   out, {});
            report_written(out);
        } else if (*score) {
            const auto cfg = score_keys.build();
            if (cfg.actuals.empty()) throw UsageError("--actuals is required");
            const auto actuals = load(cfg.actuals, cfg);
            std::vector<sg::baselines::ForecastMatrix> fms;
            for (const auto& p : predictions)
                fms.push_back(sg::baselines::load_external_predictions(p, cfg.horizon, std::nullopt,
                                                                       pl::label_from_path(p)));
            pl::ArtifactWriter out(output_dir(cfg));
            const auto reports = pl::stage_score(fms, actuals.price.values(), variant, out, {});
            std::cout << sg::eval::metrics_table(reports);
            report_written(out);
        } else if (*pipeline) {
            const auto cfg = pipeline_keys.build();
            try {
                cfg.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const auto summary = pl::run_pipeline(cfg);
            for (const auto& [name, reports] : summary.metrics) std::cout << sg::eval::metrics_table(reports);
            if (summary.improvement)
                std::printf("average MAPE improvement from regularization: %.2f%%\n",
                            summary.improvement->average_improvement_pct);
            std::cout << summary.artifacts.size() << " artifacts in " << summary.output_dir.string() << "\n";
        } else if (*demo) {
            sg::synthetic::FixtureOptions opts;
            opts.length = demo_length;
            const auto fx = sg::synthetic::make_price_fixture(opts, demo_seed);
            fs::create_directories(demo_dir);
            if (demo_heavy) {
                const auto heavy = sg::synthetic::make_heavy_tailed_series(demo_length, demo_seed);
                sg::csv::write_file_atomic(fs::path(demo_dir) / "input.csv",
                                           sg::series::to_csv(heavy, fx.exogenous));
            } else {
                sg::csv::write_file_atomic(fs::path(demo_dir) / "input.csv",
                                           sg::series::to_csv(fx.observed, fx.exogenous));
                sg::csv::write_file_atomic(fs::path(demo_dir) / "actuals.csv",
                                           sg::series::to_csv(fx.clean, fx.exogenous));
                std::cout << fx.spike_indices.size() << " spikes injected\n";
            }
            std::cout << "wrote " << demo_dir << "\n";
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
