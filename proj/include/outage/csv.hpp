#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace outage::csv {

struct Row {
  std::size_t line = 0;  // 1-based, header is line 1
  std::vector<std::string> fields;
};

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Index of `name` in the header; throws if absent.
  std::size_t column(std::string_view name) const;
};

/// Reads a UTF-8 comma-separated file with a header row. Double-quoted fields
/// may contain commas and doubled quotes. Blank lines are skipped.
Table read_file(const std::filesystem::path& path);
Table read_stream(std::istream& in, std::string source);

/// Throws unless the header is exactly `expected` (in order).
void require_header(const Table& table, const std::vector<std::string>& expected);

double parse_double(const Table& t, const Row& row, std::size_t col);
std::optional<double> parse_optional_double(const Table& t, const Row& row, std::size_t col);
std::int64_t parse_int(const Table& t, const Row& row, std::size_t col);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Quotes the field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace outage::csv
