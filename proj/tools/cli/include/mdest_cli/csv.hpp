#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace mdest::cli {

/// Header plus data rows of a plain comma-separated file (no quoting).
struct CsvTable {
  std::filesystem::path path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line of each row

  /// Column position, or npos.
  std::size_t column(const std::string& name) const;
};

/// Throws parse errors naming file and line.
CsvTable read_csv(const std::filesystem::path& path);

/// Strict numeric cell: the whole cell must be a finite decimal number.
double parse_number(const CsvTable& t, std::size_t row, std::size_t col);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace mdest::cli
