#include "spikeguard/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "spikeguard/csv_util.hpp"

namespace spikeguard::series {

using namespace std::chrono;

namespace {

std::optional<int> digits(std::string_view s) {
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + (c - '0');
    }
    return v;
}

std::string two(int v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    // YYYY-MM-DDTHH:MM
    if (text.size() != 16 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':')
        throw std::invalid_argument("timestamp '" + std::string(text) +
                                    "' is not YYYY-MM-DDTHH:MM");
    const auto y = digits(text.substr(0, 4));
    const auto mo = digits(text.substr(5, 2));
    const auto d = digits(text.substr(8, 2));
    const auto h = digits(text.substr(11, 2));
    const auto mi = digits(text.substr(14, 2));
    if (!y || !mo || !d || !h || !mi)
        throw std::invalid_argument("timestamp '" + std::string(text) + "' has non-digits");
    const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                             day{static_cast<unsigned>(*d)}};
    if (!ymd.ok() || *h > 23 || *mi > 59)
        throw std::invalid_argument("timestamp '" + std::string(text) + "' is not a valid date");
    if (*mi % 30 != 0)
        throw std::invalid_argument("timestamp '" + std::string(text) +
                                    "' is not half-hour aligned");
    return sys_days{ymd} + hours{*h} + minutes{*mi};
}

std::string format_timestamp(Timestamp t) {
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const auto tod = t - day_point;
    const auto h = duration_cast<hours>(tod);
    const auto m = duration_cast<minutes>(tod - h);
    return std::to_string(static_cast<int>(ymd.year())) + "-" +
           two(static_cast<int>(static_cast<unsigned>(ymd.month()))) + "-" +
           two(static_cast<int>(static_cast<unsigned>(ymd.day()))) + "T" +
           two(static_cast<int>(h.count())) + ":" + two(static_cast<int>(m.count()));
}

TimeSeries::TimeSeries(Timestamp start, std::vector<double> values, std::string unit)
    : start_(start), values_(std::move(values)), unit_(std::move(unit)) {
    if (values_.empty()) throw std::invalid_argument("time series must have at least one value");
    if (start_.time_since_epoch() % kStep != minutes{0})
        throw std::invalid_argument("time series start must be half-hour aligned");
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw std::invalid_argument("non-finite value at index " + std::to_string(i));
}

TimeSeries TimeSeries::with_positions(Timestamp start, std::vector<std::size_t> positions,
                                      std::vector<double> values, std::string unit) {
    TimeSeries s(start, std::move(values), std::move(unit));
    if (positions.size() != s.values_.size())
        throw std::invalid_argument("positions and values differ in length");
    if (positions.front() != 0) throw std::invalid_argument("first grid position must be 0");
    for (std::size_t i = 1; i < positions.size(); ++i)
        if (positions[i] <= positions[i - 1])
            throw std::invalid_argument("grid positions must be strictly increasing");
    if (positions.back() + 1 != positions.size()) s.positions_ = std::move(positions);
    return s;
}

TimeSeries TimeSeries::with_values(std::vector<double> values) const {
    if (values.size() != values_.size())
        throw std::invalid_argument("with_values: length mismatch");
    TimeSeries out(start_, std::move(values), unit_);
    out.positions_ = positions_;
    return out;
}

void ExogenousFrame::validate(std::size_t length) const {
    for (const auto* col : {&demand, &temperature, &humidity, &heat_index, &is_holiday})
        if (col->size() != length)
            throw std::invalid_argument("exogenous column length " + std::to_string(col->size()) +
                                        " differs from series length " + std::to_string(length));
    for (std::size_t i = 0; i < is_holiday.size(); ++i)
        if (is_holiday[i] != 0.0 && is_holiday[i] != 1.0)
            throw std::invalid_argument("is_holiday must be 0 or 1 at index " + std::to_string(i));
}

std::size_t GapReport::missing_count() const noexcept {
    std::size_t n = 0;
    for (const auto& g : gaps) n += g.length;
    return n;
}

Ingested ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::vector<std::string> lines;
    try {
        lines = csv::read_lines(path);
    } catch (const std::exception& e) {
        throw IngestError(0, e.what());
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw IngestError(0, "empty file: " + path.string());

    const std::vector<std::string> expected{schema.timestamp, schema.price,    schema.demand,
                                            schema.temperature, schema.humidity,
                                            schema.heat_index, schema.is_holiday};
    const auto header = csv::split(lines.front());
    if (header.size() != expected.size() ||
        !std::equal(header.begin(), header.end(), expected.begin()))
        throw IngestError(1, "header does not match schema; expected '" + [&] {
            std::string h;
            for (const auto& c : expected) h += (h.empty() ? "" : ",") + c;
            return h;
        }() + "'");
    if (lines.size() == 1) throw IngestError(0, "file has a header but no data rows");

    struct Row {
        Timestamp t;
        std::size_t line;
        double fields[6];
    };
    std::vector<Row> rows;
    rows.reserve(lines.size() - 1);
    static constexpr const char* kNames[6] = {"price", "demand", "temperature",
                                              "humidity", "heat_index", "is_holiday"};
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t lineno = li + 1;
        if (lines[li].empty()) throw IngestError(lineno, "blank line");
        const auto f = csv::split(lines[li]);
        if (f.size() != expected.size())
            throw IngestError(lineno, "expected " + std::to_string(expected.size()) +
                                          " fields, got " + std::to_string(f.size()));
        Row row{};
        row.line = lineno;
        try {
            row.t = parse_timestamp(f[0]);
        } catch (const std::invalid_argument& e) {
            throw IngestError(lineno, e.what());
        }
        for (int c = 0; c < 6; ++c) {
            const auto v = csv::parse_double(f[c + 1]);
            if (!v)
                throw IngestError(lineno, std::string("non-numeric ") + kNames[c] + " '" +
                                              std::string(f[c + 1]) + "'");
            row.fields[c] = *v;
        }
        if (row.fields[5] != 0.0 && row.fields[5] != 1.0)
            throw IngestError(lineno, "is_holiday must be 0 or 1");
        rows.push_back(row);
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.t < b.t; });

    const Timestamp start = rows.front().t;
    GapReport report;
    std::vector<std::size_t> positions;
    std::vector<double> price;
    ExogenousFrame exo;
    exo.start = start;
    for (const auto& row : rows) {
        const auto pos = static_cast<std::size_t>((row.t - start) / kStep);
        if (!positions.empty() && positions.back() == pos) {
            if (report.duplicate_timestamps.empty() || report.duplicate_timestamps.back() != pos)
                report.duplicate_timestamps.push_back(pos);
            continue;
        }
        if (!positions.empty() && pos > positions.back() + 1)
            report.gaps.push_back({positions.back() + 1, pos - positions.back() - 1});
        positions.push_back(pos);
        price.push_back(row.fields[0]);
        exo.demand.push_back(row.fields[1]);
        exo.temperature.push_back(row.fields[2]);
        exo.humidity.push_back(row.fields[3]);
        exo.heat_index.push_back(row.fields[4]);
        exo.is_holiday.push_back(row.fields[5]);
    }
    auto series = TimeSeries::with_positions(start, std::move(positions), std::move(price));
    return {std::move(series), std::move(exo), std::move(report)};
}

std::string to_csv(const TimeSeries& price, const ExogenousFrame& exo, const CsvSchema& schema) {
    exo.validate(price.size());
    std::string out = schema.timestamp + "," + schema.price + "," + schema.demand + "," +
                      schema.temperature + "," + schema.humidity + "," + schema.heat_index +
                      "," + schema.is_holiday + "\n";
    for (std::size_t i = 0; i < price.size(); ++i) {
        out += format_timestamp(price.timestamp(i));
        for (double v : {price[i], exo.demand[i], exo.temperature[i], exo.humidity[i],
                         exo.heat_index[i], exo.is_holiday[i]}) {
            out += ',';
            out += csv::format_double(v);
        }
        out += '\n';
    }
    return out;
}

GapReport validate_continuity(const TimeSeries& series) {
    GapReport report;
    const auto pos = series.grid_positions();
    for (std::size_t i = 1; i < pos.size(); ++i)
        if (pos[i] > pos[i - 1] + 1) report.gaps.push_back({pos[i - 1] + 1, pos[i] - pos[i - 1] - 1});
    return report;
}

namespace {

void check_report(const TimeSeries& series, const GapReport& report, std::size_t max_gap) {
    const auto actual = validate_continuity(series);
    if (actual.gaps != report.gaps)
        throw std::invalid_argument("gap report does not describe this series");
    for (const auto& g : report.gaps)
        if (g.length > max_gap)
            throw std::invalid_argument("gap at index " + std::to_string(g.index) + " of " +
                                        std::to_string(g.length) + " steps exceeds maximum of " +
                                        std::to_string(max_gap));
}

std::vector<double> fill_column(std::span<const double> values,
                                std::span<const std::size_t> positions, FillPolicy policy) {
    if (positions.empty()) return {values.begin(), values.end()};
    std::vector<double> out;
    out.reserve(positions.back() + 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            const std::size_t run = positions[i] - positions[i - 1];
            for (std::size_t k = 1; k < run; ++k) {
                if (policy == FillPolicy::previous) {
                    out.push_back(values[i - 1]);
                } else {
                    const double frac = static_cast<double>(k) / static_cast<double>(run);
                    out.push_back(values[i - 1] + (values[i] - values[i - 1]) * frac);
                }
            }
        }
        out.push_back(values[i]);
    }
    return out;
}

}  // namespace

TimeSeries fill_gaps(const TimeSeries& series, const GapReport& report, FillPolicy policy,
                     std::size_t max_gap) {
    check_report(series, report, max_gap);
    if (series.is_contiguous()) return series;
    return TimeSeries(series.start(),
                      fill_column(series.values(), series.grid_positions(), policy),
                      series.unit());
}

ExogenousFrame fill_gaps(const ExogenousFrame& exo, const TimeSeries& price,
                         const GapReport& report, FillPolicy policy, std::size_t max_gap) {
    exo.validate(price.size());
    check_report(price, report, max_gap);
    const auto pos = price.grid_positions();
    ExogenousFrame out;
    out.start = exo.start;
    out.demand = fill_column(exo.demand, pos, policy);
    out.temperature = fill_column(exo.temperature, pos, policy);
    out.humidity = fill_column(exo.humidity, pos, policy);
    out.heat_index = fill_column(exo.heat_index, pos, policy);
    out.is_holiday = fill_column(exo.is_holiday, pos, FillPolicy::previous);
    return out;
}

}  // namespace spikeguard::series
