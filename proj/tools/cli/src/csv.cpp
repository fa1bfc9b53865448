#include "mdest_cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mdest/error.hpp"

namespace mdest::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::string::npos;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::parse, path.string() + ": cannot open file");
  CsvTable t;
  t.path = path;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      for (std::size_t i = 0; i < t.header.size(); ++i) {
        require(!t.header[i].empty(), ErrorKind::parse,
                path.string() + ":" + std::to_string(lineno) + ": empty column name");
        for (std::size_t j = 0; j < i; ++j)
          require(t.header[i] != t.header[j], ErrorKind::parse,
                  path.string() + ":" + std::to_string(lineno) + ": duplicate column '" + t.header[i] + "'");
      }
      continue;
    }
    require(cells.size() == t.header.size(), ErrorKind::parse,
            path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                " cells, found " + std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(lineno);
  }
  require(have_header, ErrorKind::parse, path.string() + ": missing header row");
  return t;
}

double parse_number(const CsvTable& t, std::size_t row, std::size_t col) {
  const std::string& cell = t.rows[row][col];
  const std::string where =
      t.path.string() + ":" + std::to_string(t.line_numbers[row]) + ": column '" + t.header[col] + "'";
  require(!cell.empty(), ErrorKind::parse, where + ": missing value");
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  require(res.ec == std::errc() && res.ptr == last, ErrorKind::parse, where + ": '" + cell + "' is not a number");
  require(std::isfinite(v), ErrorKind::parse, where + ": value is not finite");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace mdest::cli
