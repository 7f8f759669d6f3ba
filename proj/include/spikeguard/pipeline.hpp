#pragma once

// Config-driven run of every stage (ingest, regularize, split, featurize,
// forecast, score) plus the per-stage entry points the CLI subcommands use.
// Each stage reads and writes the same files whether it runs alone or inside
// run_pipeline, so the two paths produce identical bytes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spikeguard/baselines.hpp"
#include "spikeguard/evaluation.hpp"
#include "spikeguard/features.hpp"
#include "spikeguard/forecasting.hpp"
#include "spikeguard/series.hpp"
#include "spikeguard/spike.hpp"
#include "spikeguard/windowing.hpp"

namespace spikeguard::pipeline {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Toggle { off, on, both };
Toggle parse_toggle(std::string_view text);
std::string_view toggle_name(Toggle t);

// A stage failure; the message is prefixed with "[stage] ".
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// Flat "key = value" configuration. Lines starting with '#' are comments.
// List-valued keys (period, model, lag_offsets, features) take
// comma-separated values.
struct PipelineConfig {
    std::filesystem::path input;
    std::filesystem::path output_dir;
    std::filesystem::path actuals;  // optional clean ground truth, same format as input
    series::CsvSchema schema;
    series::FillPolicy fill = series::FillPolicy::linear;
    std::size_t max_gap = series::kDefaultMaxGap;

    Toggle regularize = Toggle::on;
    double lambda = 3.0;
    std::vector<std::size_t> periods{336, 1440};
    double huber_delta = 1.345;

    Toggle log_price = Toggle::off;
    bool use_lags = true;
    bool use_exogenous = true;
    std::vector<std::size_t> lag_offsets = features::kDefaultLagOffsets;
    features::PriceCounting price_counting = features::PriceCounting::as_target;

    windowing::SplitSpec split;
    std::size_t lookback = 512;
    std::size_t horizon = 48;
    std::size_t stride = 1;
    bool warmup_overlap = false;

    std::vector<std::string> models{"seasonal_naive"};
    std::size_t naive_period = 336;
    std::size_t hw_period = 48;
    std::size_t refit_stride = 1;

    std::uint64_t seed = 0;
    std::size_t threads = 1;

    // Throws std::invalid_argument for an unknown key or malformed value.
    void set(std::string_view key, std::string_view value);
    // Throws std::invalid_argument on inconsistent settings.
    void validate() const;
    // Sorted "key = value" lines; stable across runs and platforms.
    std::string canonical_text() const;
    // FNV-1a 64 of canonical_text().
    std::uint64_t hash() const;

    static PipelineConfig from_text(std::string_view text);
    static PipelineConfig from_file(const std::filesystem::path& path);
    static const std::vector<std::string>& keys();
};

spike::SpikeDetectorConfig detector_config(const PipelineConfig& cfg);
features::FeatureOptions feature_options(const PipelineConfig& cfg, bool use_log);
forecasting::ModelOptions model_options(const PipelineConfig& cfg, bool log_transform);

// Output directory from config, falling back to SPIKEGUARD_OUTPUT_DIR.
std::filesystem::path resolve_output_dir(const std::filesystem::path& configured);

// Records every file written so a failed run can remove them.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path root);
    const std::filesystem::path& root() const noexcept { return root_; }
    // Path relative to root; parent directories are created.
    void write(const std::filesystem::path& relative, std::string_view content);
    const std::vector<std::filesystem::path>& written() const noexcept { return written_; }
    // Removes written files and leaves an INCOMPLETE marker holding `reason`.
    void abandon(std::string_view reason) noexcept;

private:
    std::filesystem::path root_;
    std::vector<std::filesystem::path> written_;
};

// ---- stages -------------------------------------------------------------

struct IngestResult {
    series::TimeSeries price;
    series::ExogenousFrame exogenous;
    series::GapReport gaps;
};

// Reads a CSV, fills gaps; writes series.csv and gap_report.csv.
IngestResult stage_ingest(const std::filesystem::path& input, const series::CsvSchema& schema,
                          series::FillPolicy fill, std::size_t max_gap, ArtifactWriter& out);

// Reads a contiguous series in the canonical format (as written by ingest).
IngestResult read_series(const std::filesystem::path& path);

// Writes decomposition_<period>.csv for every period.
void write_decomposition(const stl::MultiSeasonalResult& result, std::span<const std::size_t> periods,
                         ArtifactWriter& out, const std::filesystem::path& dir = {});
stl::MultiSeasonalResult stage_decompose(const series::TimeSeries& price,
                                         std::span<const std::size_t> periods, ArtifactWriter& out);

// Writes the regularized series (canonical format), spike report, filter
// trace and per-period decompositions.
spike::Regularization stage_regularize(const IngestResult& data, const spike::SpikeDetectorConfig& cfg,
                                       ArtifactWriter& out,
                                       const std::filesystem::path& series_name = "regularized.csv");

// Writes split.csv: segment,begin,end plus the test window count.
windowing::WindowSet stage_split(std::size_t length, const windowing::SplitSpec& spec,
                                 std::size_t lookback, std::size_t horizon, std::size_t stride,
                                 bool warmup_overlap, ArtifactWriter& out);

// Writes features.csv and scalers.csv (scalers fitted on the training split).
features::FeatureFrame stage_featurize(const IngestResult& data, const features::FeatureOptions& opts,
                                       const windowing::SplitSpec& spec, ArtifactWriter& out);

std::string model_label(std::string_view model);
// "seasonal_naive", "auto_ar", "holt_winters" or "external:<path>".
// Writes <dir>/forecasts_<label>.csv.
baselines::ForecastMatrix stage_forecast(std::span<const double> series,
                                         const windowing::WindowSet& windows, std::string_view model,
                                         const forecasting::ModelOptions& opts, std::size_t threads,
                                         ArtifactWriter& out, const std::filesystem::path& dir);

// Writes <dir>/metrics.csv, metrics_per_horizon.csv and metrics.txt.
std::vector<eval::MetricReport> stage_score(std::span<const baselines::ForecastMatrix> forecasts,
                                            std::span<const double> actuals, const std::string& variant,
                                            ArtifactWriter& out, const std::filesystem::path& dir);

// Label used for a predictions file: its stem without a "forecasts_" prefix.
std::string label_from_path(const std::filesystem::path& path);

struct RunSummary {
    std::filesystem::path output_dir;
    std::vector<std::filesystem::path> artifacts;
    std::map<std::string, std::vector<eval::MetricReport>> metrics;  // by variant directory
    std::optional<eval::ImprovementReport> improvement;
};

// Runs every stage. Throws StageError; partial artifacts are removed and an
// INCOMPLETE marker is left in the output directory.
RunSummary run_pipeline(const PipelineConfig& cfg);

}  // namespace spikeguard::pipeline
