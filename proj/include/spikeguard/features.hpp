#pragma once

// Lag features, log transform, min-max scaling, calendar columns,
// correlation ranking and assembly of the model input frame.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spikeguard/series.hpp"
#include "spikeguard/windowing.hpp"

namespace spikeguard::features {

// Offsets in half-hour steps.
inline const std::vector<std::size_t> kDefaultLagOffsets{1, 2, 4, 24, 48, 96, 192, 336};

struct LagColumns {
    std::vector<std::size_t> offsets;
    std::vector<std::vector<double>> columns;  // NaN before each column's offset
    std::size_t valid_from = 0;                // max offset
};

// Throws std::invalid_argument for a zero, unsorted or too-large offset.
LagColumns make_lags(std::span<const double> values, std::span<const std::size_t> offsets);

struct LogPolicy {
    // Shift added before taking the log. Unset: 0 when all values are
    // positive, otherwise 1 - min(values).
    std::optional<double> shift_epsilon;
};

struct LogTransformed {
    std::vector<double> values;
    double epsilon = 0.0;
};

// Throws std::invalid_argument naming the first index where value + eps <= 0.
LogTransformed log_transform(std::span<const double> values, const LogPolicy& policy = {});
std::vector<double> log_transform(std::span<const double> values, double epsilon);
std::vector<double> inverse_log_transform(std::span<const double> logged, double epsilon);

struct ScalerParams {
    double min = 0.0;
    double max = 1.0;
};

// Throws std::invalid_argument on an empty or constant column.
ScalerParams fit_minmax(std::span<const double> values);
// Fits on values[train.begin, train.end) only; nothing outside is read.
ScalerParams fit_minmax(std::span<const double> values, const windowing::IndexRange& train);
std::vector<double> apply_minmax(std::span<const double> values, const ScalerParams& params);
std::vector<double> invert_minmax(std::span<const double> scaled, const ScalerParams& params);

// Named scaler parameters, stored as text lines "column,min,max".
struct ScalerSet {
    std::vector<std::pair<std::string, ScalerParams>> columns;

    const ScalerParams& at(const std::string& name) const;
    std::string to_text() const;
    static ScalerSet from_text(std::string_view text);
};

struct CalendarColumns {
    std::vector<double> hour_of_day;  // 0..23
    std::vector<double> is_weekend;   // 1 on Saturday and Sunday
};

CalendarColumns calendar_features(series::Timestamp start, std::size_t length);

struct NamedColumn {
    std::string name;
    std::span<const double> values;
};

struct CorrelationRanking {
    std::vector<std::pair<std::string, double>> ranked;  // descending |r|
    std::vector<std::string> excluded;                    // constant columns
};

double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of each column with `target`, sorted by |r| descending
// (ties keep input order). Constant columns are excluded, not fatal.
CorrelationRanking rank_correlations(std::span<const NamedColumn> columns,
                                     std::span<const double> target);

// Exogenous and calendar columns for ranking: demand, temperature, humidity,
// heat_index, is_holiday, hour_of_day, is_weekend.
std::vector<NamedColumn> exogenous_columns(const series::ExogenousFrame& exo,
                                           const CalendarColumns& calendar);

// Whether the price column counts as a model feature or only as the target.
// The published 14-feature total counts 8 lags + 6 exogenous columns, with
// price as the target.
enum class PriceCounting { as_target, as_feature };

struct FeatureOptions {
    bool use_log = false;
    bool use_lags = true;
    bool use_exogenous = true;
    std::vector<std::size_t> lag_offsets = kDefaultLagOffsets;
    PriceCounting price_counting = PriceCounting::as_target;
};

// Column order: [price], lag_<k> for each offset, then demand, hour_of_day,
// temperature, humidity, heat_index, is_weekend.
struct FeatureFrame {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<double> target;  // price, log-transformed when use_log
    std::size_t valid_from = 0;
    double log_epsilon = 0.0;
    bool log_applied = false;

    std::size_t rows() const noexcept { return target.size(); }
    std::size_t feature_count() const noexcept { return columns.size(); }
    const std::vector<double>& column(const std::string& name) const;

    // Header "index,target,<names...>"; rows before valid_from are omitted.
    std::string to_csv() const;
};

FeatureFrame assemble_feature_frame(const series::TimeSeries& price,
                                    const series::ExogenousFrame& exo,
                                    const FeatureOptions& options);

// Fits one scaler per column (and the target) on the training range only.
// Rows before valid_from are skipped when fitting lag columns.
ScalerSet fit_frame_scalers(const FeatureFrame& frame, const windowing::IndexRange& train);
FeatureFrame apply_frame_scalers(const FeatureFrame& frame, const ScalerSet& scalers);

}  // namespace spikeguard::features
