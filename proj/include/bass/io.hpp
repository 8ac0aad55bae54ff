#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bass::io {

// Throws IoError when the file cannot be read or written.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
void append_line(const std::filesystem::path& path, std::string_view line);

using CsvRow = std::vector<std::string>;

// RFC 4180 style: quoted fields may contain commas, quotes ("") and newlines.
std::vector<CsvRow> parse_csv(std::string_view content);
std::string csv_escape(std::string_view field);
std::string format_csv_row(const CsvRow& row);

// Parses a CSV with a header row into rows keyed by the required columns,
// returned in the order given. Throws ParseError naming a missing column.
std::vector<CsvRow> parse_csv_columns(std::string_view content, const std::vector<std::string>& columns);

// Shortest round-trip decimal for a double.
std::string format_double(double v);

}  // namespace bass::io
