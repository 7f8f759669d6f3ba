#include "spikeguard/features.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "spikeguard/csv_util.hpp"
#include "spikeguard/simd/kernels.hpp"

namespace spikeguard::features {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

LagColumns make_lags(std::span<const double> values, std::span<const std::size_t> offsets) {
    LagColumns out;
    for (std::size_t j = 0; j < offsets.size(); ++j) {
        if (offsets[j] == 0) throw std::invalid_argument("lag offsets must be positive");
        if (j > 0 && offsets[j] <= offsets[j - 1])
            throw std::invalid_argument("lag offsets must be strictly ascending");
        if (offsets[j] >= values.size())
            throw std::invalid_argument("lag offset " + std::to_string(offsets[j]) +
                                        " is not shorter than the series (" +
                                        std::to_string(values.size()) + ")");
    }
    out.offsets.assign(offsets.begin(), offsets.end());
    for (auto k : offsets) {
        std::vector<double> col(values.size(), kNaN);
        std::copy(values.begin(), values.end() - static_cast<std::ptrdiff_t>(k),
                  col.begin() + static_cast<std::ptrdiff_t>(k));
        out.columns.push_back(std::move(col));
    }
    out.valid_from = offsets.empty() ? 0 : offsets.back();
    return out;
}

std::vector<double> log_transform(std::span<const double> values, double epsilon) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double shifted = values[i] + epsilon;
        if (!(shifted > 0.0))
            throw std::invalid_argument("log transform: value + epsilon <= 0 at index " +
                                        std::to_string(i));
        out[i] = std::log(shifted);
    }
    return out;
}

LogTransformed log_transform(std::span<const double> values, const LogPolicy& policy) {
    double eps = 0.0;
    if (policy.shift_epsilon) {
        eps = *policy.shift_epsilon;
    } else if (!values.empty()) {
        const double lo = *std::min_element(values.begin(), values.end());
        eps = lo > 0.0 ? 0.0 : 1.0 - lo;
    }
    return {log_transform(values, eps), eps};
}

std::vector<double> inverse_log_transform(std::span<const double> logged, double epsilon) {
    std::vector<double> out(logged.size());
    for (std::size_t i = 0; i < logged.size(); ++i) out[i] = std::exp(logged[i]) - epsilon;
    return out;
}

ScalerParams fit_minmax(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("cannot fit a scaler on no values");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*hi > *lo)) throw std::invalid_argument("cannot scale a constant column");
    return {*lo, *hi};
}

ScalerParams fit_minmax(std::span<const double> values, const windowing::IndexRange& train) {
    if (train.end > values.size() || train.begin >= train.end)
        throw std::invalid_argument("training range outside the column");
    return fit_minmax(values.subspan(train.begin, train.size()));
}

std::vector<double> apply_minmax(std::span<const double> values, const ScalerParams& params) {
    const double width = params.max - params.min;
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - params.min) / width;
    return out;
}

std::vector<double> invert_minmax(std::span<const double> scaled, const ScalerParams& params) {
    const double width = params.max - params.min;
    std::vector<double> out(scaled.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) out[i] = scaled[i] * width + params.min;
    return out;
}

const ScalerParams& ScalerSet::at(const std::string& name) const {
    for (const auto& [n, p] : columns)
        if (n == name) return p;
    throw std::out_of_range("no scaler for column '" + name + "'");
}

std::string ScalerSet::to_text() const {
    std::string out = "column,min,max\n";
    for (const auto& [name, p] : columns)
        out += name + "," + csv::format_double(p.min) + "," + csv::format_double(p.max) + "\n";
    return out;
}

ScalerSet ScalerSet::from_text(std::string_view text) {
    ScalerSet set;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (header) {
            if (line != "column,min,max") throw std::invalid_argument("scaler file header must be column,min,max");
            header = false;
            continue;
        }
        const auto f = csv::split(line);
        const auto lo = f.size() == 3 ? csv::parse_double(f[1]) : std::nullopt;
        const auto hi = f.size() == 3 ? csv::parse_double(f[2]) : std::nullopt;
        if (!lo || !hi) throw std::invalid_argument("malformed scaler line '" + std::string(line) + "'");
        set.columns.emplace_back(std::string(f[0]), ScalerParams{*lo, *hi});
    }
    return set;
}

CalendarColumns calendar_features(series::Timestamp start, std::size_t length) {
    using namespace std::chrono;
    CalendarColumns out;
    out.hour_of_day.resize(length);
    out.is_weekend.resize(length);
    for (std::size_t i = 0; i < length; ++i) {
        const auto t = start + series::kStep * i;
        const auto day_point = floor<days>(t);
        const auto hour = duration_cast<hours>(t - day_point).count();
        const weekday wd{day_point};
        out.hour_of_day[i] = static_cast<double>(hour);
        out.is_weekend[i] = (wd == Saturday || wd == Sunday) ? 1.0 : 0.0;
    }
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("correlation needs two equal-length, non-empty columns");
    const auto& k = simd::kernels();
    const double n = static_cast<double>(x.size());
    const double mx = k.sum(x) / n;
    const double my = k.sum(y) / n;
    std::vector<double> cx(x.size()), cy(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        cx[i] = x[i] - mx;
        cy[i] = y[i] - my;
    }
    const double sxx = k.dot(cx, cx);
    const double syy = k.dot(cy, cy);
    if (!(sxx > 0.0) || !(syy > 0.0)) return kNaN;
    return std::clamp(k.dot(cx, cy) / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationRanking rank_correlations(std::span<const NamedColumn> columns,
                                     std::span<const double> target) {
    CorrelationRanking out;
    for (const auto& c : columns) {
        if (c.values.size() != target.size())
            throw std::invalid_argument("column '" + c.name + "' differs in length from the target");
        const double r = pearson(c.values, target);
        if (std::isnan(r)) {
            std::cerr << "warning: column '" << c.name << "' is constant; excluded from ranking\n";
            out.excluded.push_back(c.name);
            continue;
        }
        out.ranked.emplace_back(c.name, r);
    }
    std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const auto& a, const auto& b) {
        return std::fabs(a.second) > std::fabs(b.second);
    });
    return out;
}

std::vector<NamedColumn> exogenous_columns(const series::ExogenousFrame& exo,
                                           const CalendarColumns& calendar) {
    return {{"demand", exo.demand},           {"temperature", exo.temperature},
            {"humidity", exo.humidity},       {"heat_index", exo.heat_index},
            {"is_holiday", exo.is_holiday},   {"hour_of_day", calendar.hour_of_day},
            {"is_weekend", calendar.is_weekend}};
}

const std::vector<double>& FeatureFrame::column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return columns[i];
    throw std::out_of_range("no feature column '" + name + "'");
}

std::string FeatureFrame::to_csv() const {
    std::string out = "index,target";
    for (const auto& n : names) out += "," + n;
    out += '\n';
    for (std::size_t i = valid_from; i < rows(); ++i) {
        out += std::to_string(i) + "," + csv::format_double(target[i]);
        for (const auto& c : columns) out += "," + csv::format_double(c[i]);
        out += '\n';
    }
    return out;
}

FeatureFrame assemble_feature_frame(const series::TimeSeries& price,
                                    const series::ExogenousFrame& exo,
                                    const FeatureOptions& options) {
    if (!price.is_contiguous()) throw std::invalid_argument("price series has gaps");
    if (options.use_exogenous) exo.validate(price.size());

    FeatureFrame frame;
    if (options.use_log) {
        auto logged = log_transform(price.values());
        frame.target = std::move(logged.values);
        frame.log_epsilon = logged.epsilon;
        frame.log_applied = true;
    } else {
        frame.target.assign(price.values().begin(), price.values().end());
    }

    if (options.price_counting == PriceCounting::as_feature) {
        frame.names.push_back("price");
        frame.columns.push_back(frame.target);
    }
    if (options.use_lags) {
        auto lags = make_lags(frame.target, options.lag_offsets);
        for (std::size_t j = 0; j < lags.offsets.size(); ++j) {
            frame.names.push_back("lag_" + std::to_string(lags.offsets[j]));
            frame.columns.push_back(std::move(lags.columns[j]));
        }
        frame.valid_from = lags.valid_from;
    }
    if (options.use_exogenous) {
        auto cal = calendar_features(price.start(), price.size());
        frame.names.insert(frame.names.end(), {"demand", "hour_of_day", "temperature", "humidity",
                                               "heat_index", "is_weekend"});
        frame.columns.push_back(exo.demand);
        frame.columns.push_back(std::move(cal.hour_of_day));
        frame.columns.push_back(exo.temperature);
        frame.columns.push_back(exo.humidity);
        frame.columns.push_back(exo.heat_index);
        frame.columns.push_back(std::move(cal.is_weekend));
    }
    return frame;
}

namespace {

ScalerParams fit_named(std::span<const double> values, const windowing::IndexRange& r,
                       const std::string& name) {
    try {
        return fit_minmax(values, r);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("column " + name + ": " + e.what());
    }
}

}  // namespace

ScalerSet fit_frame_scalers(const FeatureFrame& frame, const windowing::IndexRange& train) {
    if (train.end > frame.rows()) throw std::invalid_argument("training range exceeds frame");
    ScalerSet set;
    set.columns.emplace_back("target", fit_named(frame.target, train, "target"));
    for (std::size_t c = 0; c < frame.columns.size(); ++c) {
        const bool is_lag = frame.names[c].starts_with("lag_");
        windowing::IndexRange r = train;
        if (is_lag) r.begin = std::max(r.begin, frame.valid_from);
        if (r.begin >= r.end)
            throw std::invalid_argument("training range holds no valid rows for " + frame.names[c]);
        set.columns.emplace_back(frame.names[c], fit_named(frame.columns[c], r, frame.names[c]));
    }
    return set;
}

FeatureFrame apply_frame_scalers(const FeatureFrame& frame, const ScalerSet& scalers) {
    FeatureFrame out = frame;
    out.target = apply_minmax(frame.target, scalers.at("target"));
    for (std::size_t c = 0; c < frame.columns.size(); ++c)
        out.columns[c] = apply_minmax(frame.columns[c], scalers.at(frame.names[c]));
    return out;
}

}  // namespace spikeguard::features
