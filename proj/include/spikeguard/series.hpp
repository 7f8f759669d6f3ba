#pragma once

// Half-hourly price series, companion exogenous columns, CSV ingestion and
// gap repair.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spikeguard::series {

// Local wall-clock time (UTC+8 for the Singapore market); no zone handling.
using Timestamp = std::chrono::sys_time<std::chrono::minutes>;

inline constexpr std::chrono::minutes kStep{30};

// Parses "YYYY-MM-DDTHH:MM". Throws std::invalid_argument on malformed input
// or a time that is not on a half-hour boundary.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

class IngestError : public std::runtime_error {
public:
    IngestError(std::size_t row, const std::string& what)
        : std::runtime_error(row == 0 ? what : "row " + std::to_string(row) + ": " + what),
          row_(row) {}

    // 1-based line number in the file (header is line 1); 0 when not row-specific.
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

// Uniform half-hourly series. Values are stored densely; when the series was
// read from a file with missing half-hours, `grid_positions()` gives each
// value's offset (in steps) from `start()` until the gaps are filled.
class TimeSeries {
public:
    TimeSeries(Timestamp start, std::vector<double> values, std::string unit = "S$/MWh");

    // Non-contiguous series: positions strictly increasing, positions[0] == 0.
    static TimeSeries with_positions(Timestamp start, std::vector<std::size_t> positions,
                                     std::vector<double> values, std::string unit = "S$/MWh");

    Timestamp start() const noexcept { return start_; }
    std::chrono::minutes step() const noexcept { return kStep; }
    std::span<const double> values() const noexcept { return values_; }
    const std::string& unit() const noexcept { return unit_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    bool is_contiguous() const noexcept { return positions_.empty(); }
    std::size_t grid_position(std::size_t i) const {
        return positions_.empty() ? i : positions_[i];
    }
    std::span<const std::size_t> grid_positions() const noexcept { return positions_; }
    Timestamp timestamp(std::size_t i) const { return start_ + kStep * grid_position(i); }

    // Copy with the same start/unit and new values (must keep the length).
    TimeSeries with_values(std::vector<double> values) const;

private:
    Timestamp start_;
    std::vector<double> values_;
    std::vector<std::size_t> positions_;
    std::string unit_;
};

struct ExogenousFrame {
    Timestamp start;
    std::vector<double> demand;       // MW
    std::vector<double> temperature;  // deg C
    std::vector<double> humidity;     // %
    std::vector<double> heat_index;   // deg C
    std::vector<double> is_holiday;   // 0 or 1

    std::size_t size() const noexcept { return demand.size(); }
    // Throws std::invalid_argument if column lengths differ from `length` or
    // is_holiday holds anything but 0/1.
    void validate(std::size_t length) const;
};

struct Gap {
    std::size_t index;   // first missing grid index
    std::size_t length;  // run length in steps

    bool operator==(const Gap&) const = default;
};

struct GapReport {
    std::vector<Gap> gaps;
    std::vector<std::size_t> duplicate_timestamps;  // grid indices seen more than once

    bool empty() const noexcept { return gaps.empty() && duplicate_timestamps.empty(); }
    std::size_t missing_count() const noexcept;
};

// Column names for the seven input fields, in file order.
struct CsvSchema {
    std::string timestamp = "timestamp";
    std::string price = "usep_price";
    std::string demand = "demand";
    std::string temperature = "temperature";
    std::string humidity = "humidity";
    std::string heat_index = "heat_index";
    std::string is_holiday = "is_holiday";
};

struct Ingested {
    TimeSeries price;
    ExogenousFrame exogenous;
    GapReport report;
};

Ingested ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Writes the canonical input format; the inverse of ingest_csv on contiguous data.
std::string to_csv(const TimeSeries& price, const ExogenousFrame& exo,
                   const CsvSchema& schema = {});

GapReport validate_continuity(const TimeSeries& series);

enum class FillPolicy { linear, previous };

inline constexpr std::size_t kDefaultMaxGap = 48;

// Returns a contiguous series. `report` must describe the series' gaps (as
// produced by validate_continuity or ingest_csv); throws std::invalid_argument
// when a run exceeds `max_gap` or the report does not match the series.
TimeSeries fill_gaps(const TimeSeries& series, const GapReport& report, FillPolicy policy,
                     std::size_t max_gap = kDefaultMaxGap);

// Companion fill for exogenous columns. is_holiday is always carried forward.
ExogenousFrame fill_gaps(const ExogenousFrame& exo, const TimeSeries& price,
                         const GapReport& report, FillPolicy policy,
                         std::size_t max_gap = kDefaultMaxGap);

}  // namespace spikeguard::series
