#pragma once

// Small helpers shared by every CSV reader and writer in the toolkit.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spikeguard::csv {

// Splits one record on commas. Quoting is not supported; none of the
// toolkit's formats need it.
std::vector<std::string_view> split(std::string_view line);

// Reads all lines, stripping a trailing '\r' and a leading UTF-8 BOM.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Strict decimal parse: whole field must be consumed, result finite.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

// Shortest representation that round-trips to the same double.
std::string format_double(double value);

// Writes `content` to `path` via a temporary file and rename, so readers never
// observe a half-written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace spikeguard::csv
