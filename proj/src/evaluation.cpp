#include "spikeguard/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "spikeguard/csv_util.hpp"
#include "spikeguard/simd/kernels.hpp"

namespace spikeguard::eval {
namespace {

simd::ErrorSums sums(std::span<const double> actual, std::span<const double> predicted,
                     double epsilon) {
    if (actual.size() != predicted.size())
        throw std::invalid_argument("actual and predicted differ in length");
    if (actual.empty()) throw std::invalid_argument("metrics need at least one point");
    return simd::kernels().error_sums(actual, predicted, epsilon);
}

}  // namespace

double mae(std::span<const double> actual, std::span<const double> predicted) {
    return sums(actual, predicted, kMapeEpsilon).abs / static_cast<double>(actual.size());
}

double mape(std::span<const double> actual, std::span<const double> predicted, double epsilon) {
    return sums(actual, predicted, epsilon).pct / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    return std::sqrt(sums(actual, predicted, kMapeEpsilon).sq / static_cast<double>(actual.size()));
}

MetricReport score_forecasts(const baselines::ForecastMatrix& forecasts,
                             std::span<const double> actual_series, std::string variant) {
    forecasts.validate();
    if (forecasts.windows() == 0) throw std::invalid_argument("no forecast windows to score");
    const std::size_t H = forecasts.horizon;
    const std::size_t W = forecasts.windows();
    if (forecasts.origins.back() + H > actual_series.size())
        throw std::invalid_argument("forecast window at " + std::to_string(forecasts.origins.back()) +
                                    " runs past the end of the actuals");

    MetricReport r;
    r.model = forecasts.label;
    r.variant = std::move(variant);
    r.per_horizon_mae.assign(H, 0.0);
    r.per_horizon_mape.assign(H, 0.0);
    r.per_horizon_rmse.assign(H, 0.0);

    // Window sums are reduced in window order so the result does not depend on
    // how forecasts were produced.
    double abs = 0.0, sq = 0.0, pct = 0.0;
    for (std::size_t w = 0; w < W; ++w) {
        const auto pred = forecasts.row(w);
        const auto act = actual_series.subspan(forecasts.origins[w], H);
        const auto s = simd::kernels().error_sums(act, pred, kMapeEpsilon);
        abs += s.abs;
        sq += s.sq;
        pct += s.pct;
        r.guarded_terms += s.guarded;
        for (std::size_t h = 0; h < H; ++h) {
            const double e = std::fabs(act[h] - pred[h]);
            r.per_horizon_mae[h] += e;
            r.per_horizon_rmse[h] += e * e;
            r.per_horizon_mape[h] += 100.0 * e / std::max(std::fabs(act[h]), kMapeEpsilon);
        }
    }
    r.n = W * H;
    const double n = static_cast<double>(r.n);
    r.mae = abs / n;
    r.mape = pct / n;
    r.rmse = std::sqrt(sq / n);
    const double w = static_cast<double>(W);
    for (std::size_t h = 0; h < H; ++h) {
        r.per_horizon_mae[h] /= w;
        r.per_horizon_mape[h] /= w;
        r.per_horizon_rmse[h] = std::sqrt(r.per_horizon_rmse[h] / w);
    }
    return r;
}

std::string metrics_csv(std::span<const MetricReport> reports) {
    std::string out = "model,variant,mae,mape_pct,rmse,n,guarded_terms\n";
    for (const auto& r : reports)
        out += r.model + "," + r.variant + "," + csv::format_double(r.mae) + "," +
               csv::format_double(r.mape) + "," + csv::format_double(r.rmse) + "," +
               std::to_string(r.n) + "," + std::to_string(r.guarded_terms) + "\n";
    return out;
}

std::string per_horizon_csv(std::span<const MetricReport> reports) {
    std::string out = "model,variant,h,mae,mape_pct,rmse\n";
    for (const auto& r : reports)
        for (std::size_t h = 0; h < r.per_horizon_mae.size(); ++h)
            out += r.model + "," + r.variant + "," + std::to_string(h) + "," +
                   csv::format_double(r.per_horizon_mae[h]) + "," +
                   csv::format_double(r.per_horizon_mape[h]) + "," +
                   csv::format_double(r.per_horizon_rmse[h]) + "\n";
    return out;
}

std::string metrics_table(std::span<const MetricReport> reports) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %-8s %10s %12s %12s %10s\n", "model", "variant",
                  "MAPE(%)", "MAE", "RMSE", "n");
    out += line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-24s %-8s %10.3f %12.4f %12.4f %10zu\n",
                      r.model.c_str(), r.variant.c_str(), r.mape, r.mae, r.rmse, r.n);
        out += line;
        if (r.guarded_terms > 0) {
            std::snprintf(line, sizeof line, "  note: %zu MAPE terms used the %.0e denominator guard\n",
                          r.guarded_terms, kMapeEpsilon);
            out += line;
        }
    }
    return out;
}

std::string ImprovementReport::to_csv() const {
    std::string out = "model,mape_raw_pct,mape_regularized_pct,improvement_pct\n";
    for (const auto& r : rows)
        out += r.model + "," + csv::format_double(r.mape_raw) + "," +
               csv::format_double(r.mape_regularized) + "," +
               csv::format_double(r.improvement_pct) + "\n";
    out += "average,,," + csv::format_double(average_improvement_pct) + "\n";
    return out;
}

ImprovementReport improvement_report(std::span<const MetricReport> raw,
                                     std::span<const MetricReport> regularized) {
    if (raw.size() != regularized.size())
        throw std::invalid_argument("raw and regularized report sets differ in size");
    ImprovementReport out;
    for (const auto& r : raw) {
        const MetricReport* match = nullptr;
        for (const auto& g : regularized)
            if (g.model == r.model) match = &g;
        if (!match) throw std::invalid_argument("no regularized report for model '" + r.model + "'");
        if (!(r.mape > 0.0))
            throw std::invalid_argument("raw MAPE of '" + r.model + "' is zero; improvement undefined");
        out.rows.push_back({r.model, r.mape, match->mape,
                            100.0 * (r.mape - match->mape) / r.mape});
    }
    if (out.rows.empty()) throw std::invalid_argument("no reports to compare");
    double sum = 0.0;
    for (const auto& row : out.rows) sum += row.improvement_pct;
    out.average_improvement_pct = sum / static_cast<double>(out.rows.size());
    return out;
}

}  // namespace spikeguard::eval
