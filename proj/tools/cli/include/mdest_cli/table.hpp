#pragma once

#include <string>
#include <vector>

namespace mdest::cli {

/// Fixed-width text table; first column left aligned, the rest right aligned.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Fixed notation with `digits` decimals; "nan" / "-" for missing values.
std::string fmt(double v, int digits = 6);

}  // namespace mdest::cli
