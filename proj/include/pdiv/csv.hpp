#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pdiv {

// Numeric table with `#`-prefixed metadata lines, a header row, and values
// written in shortest round-trip form so a re-read reproduces them exactly.
struct CsvTable {
  std::vector<std::string> metadata;  // without the leading '#'
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  std::vector<double> column(const std::string& name) const;
};

std::string format_double(double value);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace pdiv
