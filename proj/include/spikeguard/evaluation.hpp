#pragma once

// MAE / MAPE / RMSE, pooled and per-horizon scoring of forecast matrices, and
// raw-versus-regularized MAPE improvement reports.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spikeguard/baselines.hpp"

namespace spikeguard::eval {

inline constexpr double kMapeEpsilon = 1e-8;

// All three throw std::invalid_argument on empty or mismatched inputs.
double mae(std::span<const double> actual, std::span<const double> predicted);
// Percent; denominators are max(|y|, epsilon).
double mape(std::span<const double> actual, std::span<const double> predicted,
            double epsilon = kMapeEpsilon);
double rmse(std::span<const double> actual, std::span<const double> predicted);

struct MetricReport {
    std::string model;
    std::string variant;
    double mae = 0.0;
    double mape = 0.0;  // percent
    double rmse = 0.0;
    std::size_t n = 0;
    std::size_t guarded_terms = 0;  // MAPE terms with |y| < epsilon
    std::vector<double> per_horizon_mae;
    std::vector<double> per_horizon_mape;
    std::vector<double> per_horizon_rmse;
};

// Actuals for window w, step h are actual_series[origins[w] + h], already in
// the original price domain.
MetricReport score_forecasts(const baselines::ForecastMatrix& forecasts,
                             std::span<const double> actual_series, std::string variant = "tfs");

// Header model,variant,mae,mape_pct,rmse,n,guarded_terms
std::string metrics_csv(std::span<const MetricReport> reports);
// Header model,variant,h,mae,mape_pct,rmse
std::string per_horizon_csv(std::span<const MetricReport> reports);
// Aligned text table, MAPE first.
std::string metrics_table(std::span<const MetricReport> reports);

struct ImprovementRow {
    std::string model;
    double mape_raw = 0.0;
    double mape_regularized = 0.0;
    double improvement_pct = 0.0;  // 100 * (raw - reg) / raw
};

struct ImprovementReport {
    std::vector<ImprovementRow> rows;
    double average_improvement_pct = 0.0;

    // Header model,mape_raw_pct,mape_regularized_pct,improvement_pct
    std::string to_csv() const;
};

// Matches reports by model label; throws std::invalid_argument when a label
// is missing on either side.
ImprovementReport improvement_report(std::span<const MetricReport> raw,
                                     std::span<const MetricReport> regularized);

}  // namespace spikeguard::eval
