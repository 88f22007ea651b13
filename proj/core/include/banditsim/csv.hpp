#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace banditsim {

/// A header plus string cells; every row has header.size() cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or -1.
  int column(std::string_view name) const;
};

/// Reads comma-separated text. Trailing CR is stripped, blank lines are skipped,
/// double-quoted fields are unquoted. Ragged rows throw ParseError.
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(std::string_view line);

/// Shortest representation that round-trips to the same double.
std::string format_double(double value);

double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

}  // namespace banditsim
