#include "spikeguard/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "spikeguard/csv_util.hpp"

namespace spikeguard::pipeline {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
    throw std::invalid_argument("config key '" + std::string(key) + "': '" + std::string(value) +
                                "' is not " + std::string(want));
}

std::size_t to_size(std::string_view key, std::string_view value) {
    const auto v = csv::parse_int(value);
    if (!v || *v < 0) bad_value(key, value, "a non-negative integer");
    return static_cast<std::size_t>(*v);
}

double to_real(std::string_view key, std::string_view value) {
    const auto v = csv::parse_double(value);
    if (!v) bad_value(key, value, "a finite number");
    return *v;
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
    if (value == "off" || value == "false" || value == "0" || value == "no") return false;
    bad_value(key, value, "on/off");
}

std::vector<std::string> to_list(std::string_view value) {
    std::vector<std::string> out;
    for (auto f : csv::split(value)) {
        auto t = trim(f);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::size_t> to_sizes(std::string_view key, std::string_view value) {
    std::vector<std::size_t> out;
    for (const auto& f : to_list(value)) out.push_back(to_size(key, f));
    return out;
}

template <class T>
std::string join(const std::vector<T>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_same_v<T, std::string>)
            out += items[i];
        else
            out += std::to_string(items[i]);
    }
    return out;
}

std::string get(const PipelineConfig& c, std::string_view key) {
    if (key == "input") return c.input.string();
    if (key == "output_dir") return c.output_dir.string();
    if (key == "actuals") return c.actuals.string();
    if (key == "timestamp_column") return c.schema.timestamp;
    if (key == "price_column") return c.schema.price;
    if (key == "demand_column") return c.schema.demand;
    if (key == "temperature_column") return c.schema.temperature;
    if (key == "humidity_column") return c.schema.humidity;
    if (key == "heat_index_column") return c.schema.heat_index;
    if (key == "holiday_column") return c.schema.is_holiday;
    if (key == "fill") return c.fill == series::FillPolicy::linear ? "linear" : "previous";
    if (key == "max_gap") return std::to_string(c.max_gap);
    if (key == "regularize") return std::string(toggle_name(c.regularize));
    if (key == "lambda") return csv::format_double(c.lambda);
    if (key == "period") return join(c.periods);
    if (key == "huber_delta") return csv::format_double(c.huber_delta);
    if (key == "log_price") return std::string(toggle_name(c.log_price));
    if (key == "features") {
        std::vector<std::string> f;
        if (c.use_lags) f.push_back("lags");
        if (c.use_exogenous) f.push_back("exogenous");
        return f.empty() ? "none" : join(f);
    }
    if (key == "lag_offsets") return join(c.lag_offsets);
    if (key == "price_counting")
        return c.price_counting == features::PriceCounting::as_target ? "target" : "feature";
    if (key == "split") return c.split.to_string();
    if (key == "lookback") return std::to_string(c.lookback);
    if (key == "horizon") return std::to_string(c.horizon);
    if (key == "stride") return std::to_string(c.stride);
    if (key == "warmup_overlap") return c.warmup_overlap ? "on" : "off";
    if (key == "model") return join(c.models);
    if (key == "naive_period") return std::to_string(c.naive_period);
    if (key == "hw_period") return std::to_string(c.hw_period);
    if (key == "refit_stride") return std::to_string(c.refit_stride);
    if (key == "seed") return std::to_string(c.seed);
    if (key == "threads") return std::to_string(c.threads);
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

std::string gap_report_csv(const series::GapReport& r) {
    std::string out = "kind,grid_index,length\n";
    for (const auto& g : r.gaps)
        out += "gap," + std::to_string(g.index) + "," + std::to_string(g.length) + "\n";
    for (auto d : r.duplicate_timestamps) out += "duplicate," + std::to_string(d) + ",1\n";
    return out;
}

}  // namespace

Toggle parse_toggle(std::string_view text) {
    if (text == "off" || text == "false" || text == "0" || text == "no") return Toggle::off;
    if (text == "on" || text == "true" || text == "1" || text == "yes") return Toggle::on;
    if (text == "both") return Toggle::both;
    throw std::invalid_argument("expected off, on or both, got '" + std::string(text) + "'");
}

std::string_view toggle_name(Toggle t) {
    switch (t) {
        case Toggle::off: return "off";
        case Toggle::on: return "on";
        case Toggle::both: return "both";
    }
    return "off";
}

const std::vector<std::string>& PipelineConfig::keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> v{
            "input",        "output_dir",        "actuals",         "timestamp_column",
            "price_column", "demand_column",     "temperature_column", "humidity_column",
            "heat_index_column", "holiday_column", "fill",          "max_gap",
            "regularize",   "lambda",            "period",          "huber_delta",
            "log_price",    "features",          "lag_offsets",     "price_counting",
            "split",        "lookback",          "horizon",         "stride",
            "warmup_overlap", "model",           "naive_period",    "hw_period",
            "refit_stride", "seed",              "threads"};
        std::sort(v.begin(), v.end());
        return v;
    }();
    return k;
}

void PipelineConfig::set(std::string_view key, std::string_view raw) {
    const std::string value = trim(raw);
    if (key == "input") input = value;
    else if (key == "output_dir") output_dir = value;
    else if (key == "actuals") actuals = value;
    else if (key == "timestamp_column") schema.timestamp = value;
    else if (key == "price_column") schema.price = value;
    else if (key == "demand_column") schema.demand = value;
    else if (key == "temperature_column") schema.temperature = value;
    else if (key == "humidity_column") schema.humidity = value;
    else if (key == "heat_index_column") schema.heat_index = value;
    else if (key == "holiday_column") schema.is_holiday = value;
    else if (key == "fill") {
        if (value == "linear") fill = series::FillPolicy::linear;
        else if (value == "previous") fill = series::FillPolicy::previous;
        else bad_value(key, value, "linear or previous");
    } else if (key == "max_gap") max_gap = to_size(key, value);
    else if (key == "regularize") regularize = parse_toggle(value);
    else if (key == "lambda") lambda = to_real(key, value);
    else if (key == "period") periods = to_sizes(key, value);
    else if (key == "huber_delta") {
        huber_delta = value == "inf" ? std::numeric_limits<double>::infinity() : to_real(key, value);
    } else if (key == "log_price") log_price = parse_toggle(value);
    else if (key == "features") {
        use_lags = use_exogenous = false;
        for (const auto& f : to_list(value)) {
            if (f == "lags") use_lags = true;
            else if (f == "exogenous") use_exogenous = true;
            else if (f == "all") use_lags = use_exogenous = true;
            else if (f != "none") bad_value(key, f, "lags, exogenous, all or none");
        }
    } else if (key == "lag_offsets") lag_offsets = to_sizes(key, value);
    else if (key == "price_counting") {
        if (value == "target") price_counting = features::PriceCounting::as_target;
        else if (value == "feature") price_counting = features::PriceCounting::as_feature;
        else bad_value(key, value, "target or feature");
    } else if (key == "split") split = windowing::SplitSpec::parse(value);
    else if (key == "lookback") lookback = to_size(key, value);
    else if (key == "horizon") horizon = to_size(key, value);
    else if (key == "stride") stride = to_size(key, value);
    else if (key == "warmup_overlap") warmup_overlap = to_bool(key, value);
    else if (key == "model") models = to_list(value);
    else if (key == "naive_period") naive_period = to_size(key, value);
    else if (key == "hw_period") hw_period = to_size(key, value);
    else if (key == "refit_stride") refit_stride = to_size(key, value);
    else if (key == "seed") seed = to_size(key, value);
    else if (key == "threads") threads = to_size(key, value);
    else throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

void PipelineConfig::validate() const {
    if (input.empty()) throw std::invalid_argument("config: input is required");
    if (lookback == 0 || horizon == 0 || stride == 0)
        throw std::invalid_argument("config: lookback, horizon and stride must be >= 1");
    if (threads == 0 || threads > 256) throw std::invalid_argument("config: threads must be in 1..256");
    if (refit_stride == 0) throw std::invalid_argument("config: refit_stride must be >= 1");
    if (max_gap == 0) throw std::invalid_argument("config: max_gap must be >= 1");
    if (naive_period == 0 || naive_period > lookback)
        throw std::invalid_argument("config: naive_period must be in 1..lookback");
    if (hw_period < 2 || 2 * hw_period > lookback)
        throw std::invalid_argument("config: hw_period must be >= 2 with two cycles in the lookback");
    split.validate();
    detector_config(*this).validate();
    if (models.empty()) throw std::invalid_argument("config: at least one model is required");
    std::vector<std::string> labels;
    for (const auto& m : models) {
        if (m.starts_with("external:")) {
            if (m.size() == 9) throw std::invalid_argument("config: external model needs a path");
        } else {
            forecasting::parse_model(m);
        }
        labels.push_back(model_label(m));
    }
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
        throw std::invalid_argument("config: two models share the label '" +
                                    *std::adjacent_find(labels.begin(), labels.end()) + "'");
    for (std::size_t j = 0; j < lag_offsets.size(); ++j)
        if (lag_offsets[j] == 0 || (j > 0 && lag_offsets[j] <= lag_offsets[j - 1]))
            throw std::invalid_argument("config: lag_offsets must be positive and ascending");
}

std::string PipelineConfig::canonical_text() const {
    std::string out;
    for (const auto& k : keys()) out += k + " = " + get(*this, k) + "\n";
    return out;
}

std::uint64_t PipelineConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

PipelineConfig PipelineConfig::from_text(std::string_view text) {
    PipelineConfig cfg;
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        std::string_view l = line;
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        if (l.empty() || l.front() == '#') continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        try {
            cfg.set(trim(l.substr(0, eq)), l.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

PipelineConfig PipelineConfig::from_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

spike::SpikeDetectorConfig detector_config(const PipelineConfig& cfg) {
    spike::SpikeDetectorConfig d;
    d.lambda = cfg.lambda;
    d.periods = cfg.periods;
    d.huber.delta = cfg.huber_delta;
    return d;
}

features::FeatureOptions feature_options(const PipelineConfig& cfg, bool use_log) {
    features::FeatureOptions f;
    f.use_log = use_log;
    f.use_lags = cfg.use_lags;
    f.use_exogenous = cfg.use_exogenous;
    f.lag_offsets = cfg.lag_offsets;
    f.price_counting = cfg.price_counting;
    return f;
}

forecasting::ModelOptions model_options(const PipelineConfig& cfg, bool log_transform) {
    forecasting::ModelOptions m;
    m.naive_period = cfg.naive_period;
    m.hw_period = cfg.hw_period;
    m.log_transform = log_transform;
    m.refit_stride = cfg.refit_stride;
    return m;
}

fs::path resolve_output_dir(const fs::path& configured) {
    if (!configured.empty()) return configured;
    if (const char* env = std::getenv("SPIKEGUARD_OUTPUT_DIR"); env && *env) return env;
    throw std::invalid_argument("no output directory: set output_dir or SPIKEGUARD_OUTPUT_DIR");
}

ArtifactWriter::ArtifactWriter(fs::path root) : root_(std::move(root)) {}

void ArtifactWriter::write(const fs::path& relative, std::string_view content) {
    const fs::path full = root_ / relative;
    fs::create_directories(full.parent_path());
    csv::write_file_atomic(full, content);
    if (std::find(written_.begin(), written_.end(), relative) == written_.end())
        written_.push_back(relative);
}

void ArtifactWriter::abandon(std::string_view reason) noexcept {
    std::error_code ec;
    for (const auto& rel : written_) {
        fs::remove(root_ / rel, ec);
        // Drop subdirectories we emptied.
        for (auto dir = rel.parent_path(); !dir.empty(); dir = dir.parent_path())
            if (fs::is_empty(root_ / dir, ec)) fs::remove(root_ / dir, ec);
    }
    written_.clear();
    try {
        fs::create_directories(root_, ec);
        csv::write_file_atomic(root_ / "INCOMPLETE", std::string(reason) + "\n");
    } catch (...) {
    }
}

IngestResult stage_ingest(const fs::path& input, const series::CsvSchema& schema,
                          series::FillPolicy fill, std::size_t max_gap, ArtifactWriter& out) {
    auto in = series::ingest_csv(input, schema);
    IngestResult r{in.price, in.exogenous, in.report};
    if (!in.report.gaps.empty()) {
        r.exogenous = series::fill_gaps(in.exogenous, in.price, in.report, fill, max_gap);
        r.price = series::fill_gaps(in.price, in.report, fill, max_gap);
    }
    out.write("series.csv", series::to_csv(r.price, r.exogenous));
    out.write("gap_report.csv", gap_report_csv(in.report));
    return r;
}

IngestResult read_series(const fs::path& path) {
    auto in = series::ingest_csv(path);
    if (!in.report.empty())
        throw std::invalid_argument(path.string() + " has gaps or duplicates; run ingest first");
    return {std::move(in.price), std::move(in.exogenous), {}};
}

void write_decomposition(const stl::MultiSeasonalResult& result, std::span<const std::size_t> periods,
                         ArtifactWriter& out, const fs::path& dir) {
    for (std::size_t k = 0; k < periods.size(); ++k)
        out.write(dir / ("decomposition_" + std::to_string(periods[k]) + ".csv"),
                  stl::to_csv(result.stage_inputs[k], result.per_period[k]));
}

stl::MultiSeasonalResult stage_decompose(const series::TimeSeries& price,
                                         std::span<const std::size_t> periods, ArtifactWriter& out) {
    auto result = stl::multi_seasonal_decompose(price, periods);
    write_decomposition(result, periods, out);
    return result;
}

spike::Regularization stage_regularize(const IngestResult& data, const spike::SpikeDetectorConfig& cfg,
                                       ArtifactWriter& out, const fs::path& series_name) {
    auto reg = spike::detect_and_regularize(data.price, cfg);
    out.write(series_name, series::to_csv(reg.regularized, data.exogenous));
    out.write("spike_report.csv", reg.report.to_csv());
    out.write("filter_trace.csv", reg.trace.to_csv(reg.decomposition.deseasonalized));
    write_decomposition(reg.decomposition, cfg.periods, out);
    return reg;
}

windowing::WindowSet stage_split(std::size_t length, const windowing::SplitSpec& spec,
                                 std::size_t lookback, std::size_t horizon, std::size_t stride,
                                 bool warmup_overlap, ArtifactWriter& out) {
    const auto split = windowing::chronological_split(length, spec);
    auto ws = windowing::test_windows(split, lookback, horizon, stride, warmup_overlap);
    if (ws.size() == 0)
        throw std::invalid_argument("test segment of " + std::to_string(split.test.size()) +
                                    " steps holds no window of lookback " + std::to_string(lookback) +
                                    " + horizon " + std::to_string(horizon));
    std::string text = "segment,begin,end,count\n";
    for (const auto& [name, r] : {std::pair{"train", split.train}, std::pair{"validation", split.validation},
                                  std::pair{"test", split.test}})
        text += std::string(name) + "," + std::to_string(r.begin) + "," + std::to_string(r.end) + "," +
                std::to_string(r.size()) + "\n";
    text += "test_windows," + std::to_string(ws.windows.front().input.begin) + "," +
            std::to_string(ws.windows.back().target.end) + "," + std::to_string(ws.size()) + "\n";
    out.write("split.csv", text);
    return ws;
}

features::FeatureFrame stage_featurize(const IngestResult& data, const features::FeatureOptions& opts,
                                       const windowing::SplitSpec& spec, ArtifactWriter& out) {
    auto frame = features::assemble_feature_frame(data.price, data.exogenous, opts);
    const auto split = windowing::chronological_split(frame.rows(), spec);
    const auto scalers = features::fit_frame_scalers(frame, split.train);
    auto scaled = features::apply_frame_scalers(frame, scalers);
    out.write("features.csv", scaled.to_csv());
    out.write("scalers.csv", scalers.to_text());
    return scaled;
}

std::string label_from_path(const fs::path& path) {
    std::string stem = path.stem().string();
    if (stem.starts_with("forecasts_") && stem.size() > 10) stem = stem.substr(10);
    return stem;
}

std::string model_label(std::string_view model) {
    if (model.starts_with("external:")) return label_from_path(fs::path(model.substr(9)));
    return std::string(model);
}

baselines::ForecastMatrix stage_forecast(std::span<const double> series,
                                         const windowing::WindowSet& windows, std::string_view model,
                                         const forecasting::ModelOptions& opts, std::size_t threads,
                                         ArtifactWriter& out, const fs::path& dir) {
    baselines::ForecastMatrix fm;
    const std::string label = model_label(model);
    if (model.starts_with("external:")) {
        std::vector<std::size_t> origins;
        for (const auto& w : windows.windows) origins.push_back(w.target.begin);
        fm = baselines::load_external_predictions(fs::path(model.substr(9)), windows.horizon,
                                                  std::span<const std::size_t>(origins), label);
    } else {
        fm = forecasting::forecast_windows(series, windows, forecasting::parse_model(model), opts,
                                           threads);
    }
    fm.label = label;
    out.write(dir / ("forecasts_" + label + ".csv"), fm.to_csv());
    return fm;
}

std::vector<eval::MetricReport> stage_score(std::span<const baselines::ForecastMatrix> forecasts,
                                            std::span<const double> actuals, const std::string& variant,
                                            ArtifactWriter& out, const fs::path& dir) {
    std::vector<eval::MetricReport> reports;
    for (const auto& fm : forecasts) reports.push_back(eval::score_forecasts(fm, actuals, variant));
    out.write(dir / "metrics.csv", eval::metrics_csv(reports));
    out.write(dir / "metrics_per_horizon.csv", eval::per_horizon_csv(reports));
    out.write(dir / "metrics.txt", eval::metrics_table(reports));
    return reports;
}

RunSummary run_pipeline(const PipelineConfig& cfg) {
    std::string stage = "config";
    std::optional<ArtifactWriter> out;
    try {
        cfg.validate();
        const fs::path root = resolve_output_dir(cfg.output_dir);
        fs::create_directories(root);
        fs::remove(root / "INCOMPLETE");
        out.emplace(root);

        stage = "ingest";
        const IngestResult raw = stage_ingest(cfg.input, cfg.schema, cfg.fill, cfg.max_gap, *out);

        std::optional<IngestResult> regularized;
        if (cfg.regularize != Toggle::off) {
            stage = "regularize";
            auto reg = stage_regularize(raw, detector_config(cfg), *out);
            regularized = IngestResult{std::move(reg.regularized), raw.exogenous, {}};
        }

        stage = "split";
        const auto windows = stage_split(raw.price.size(), cfg.split, cfg.lookback, cfg.horizon,
                                         cfg.stride, cfg.warmup_overlap, *out);

        stage = "featurize";
        stage_featurize(regularized ? *regularized : raw,
                        feature_options(cfg, cfg.log_price != Toggle::off), cfg.split, *out);

        std::vector<double> actuals(raw.price.values().begin(), raw.price.values().end());
        if (!cfg.actuals.empty()) {
            stage = "actuals";
            auto a = series::ingest_csv(cfg.actuals, cfg.schema);
            auto filled = a.report.gaps.empty()
                              ? a.price
                              : series::fill_gaps(a.price, a.report, cfg.fill, cfg.max_gap);
            if (filled.size() != raw.price.size() || filled.start() != raw.price.start())
                throw std::invalid_argument("actuals do not cover the same timestamps as the input");
            actuals.assign(filled.values().begin(), filled.values().end());
        }

        RunSummary summary;
        summary.output_dir = root;
        std::vector<bool> log_settings;
        if (cfg.log_price != Toggle::on) log_settings.push_back(false);
        if (cfg.log_price != Toggle::off) log_settings.push_back(true);

        for (const bool use_reg : {false, true}) {
            if (use_reg ? cfg.regularize == Toggle::off : cfg.regularize == Toggle::on) continue;
            const auto values = (use_reg ? regularized->price : raw.price).values();
            for (const bool use_log : log_settings) {
                const std::string variant =
                    std::string(use_reg ? "regularized" : "raw") + (use_log ? "_log" : "");
                stage = "forecast";
                std::vector<baselines::ForecastMatrix> fms;
                for (const auto& m : cfg.models)
                    fms.push_back(stage_forecast(values, windows, m, model_options(cfg, use_log),
                                                 cfg.threads, *out, variant));
                stage = "score";
                summary.metrics[variant] = stage_score(fms, actuals, variant, *out, variant);
            }
        }

        stage = "report";
        if (cfg.regularize == Toggle::both) {
            for (const bool use_log : log_settings) {
                const std::string suffix = use_log ? "_log" : "";
                auto imp = eval::improvement_report(summary.metrics.at("raw" + suffix),
                                                    summary.metrics.at("regularized" + suffix));
                out->write("improvement" + suffix + ".csv", imp.to_csv());
                if (!summary.improvement) summary.improvement = std::move(imp);
            }
        }
        if (cfg.log_price == Toggle::both) {
            std::string text = "variant,model,mape_without_log_pct,mape_with_log_pct,change_pct\n";
            for (const auto& [variant, reports] : summary.metrics) {
                if (variant.ends_with("_log")) continue;
                const auto& logged = summary.metrics.at(variant + "_log");
                for (std::size_t i = 0; i < reports.size(); ++i) {
                    const double a = reports[i].mape, b = logged[i].mape;
                    text += variant + "," + reports[i].model + "," + csv::format_double(a) + "," +
                            csv::format_double(b) + "," + csv::format_double(100.0 * (b - a) / a) + "\n";
                }
            }
            out->write("ablation.csv", text);
        }

        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.hash()));
        std::string manifest = "version = " + std::string(kVersion) + "\nconfig_hash = " + hash +
                               "\n\n[config]\n" + cfg.canonical_text() + "\n[artifacts]\n";
        for (const auto& p : out->written()) manifest += p.generic_string() + "\n";
        out->write("manifest.txt", manifest);
        summary.artifacts = out->written();
        return summary;
    } catch (const std::exception& e) {
        const StageError err(stage, e.what());
        if (out) out->abandon(err.what());
        throw err;
    }
}

}  // namespace spikeguard::pipeline
