#include "pdiv/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pdiv/errors.hpp"

namespace pdiv {

void CsvTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw DomainError("CSV row width does not match header");
  rows.push_back(std::move(row));
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw DomainError("no CSV column named " + name);
  const auto idx = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[idx]);
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& line : table.metadata) out << "# " << line << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

namespace {

double parse_double(const std::string& token) {
  if (token == "nan") return std::nan("");
  if (token == "inf") return INFINITY;
  if (token == "-inf") return -INFINITY;
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw std::runtime_error("bad CSV number: " + token);
  }
  return value;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.metadata.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header) {
      table.columns = cells;
      header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c));
    table.add_row(std::move(row));
  }
  return table;
}

}  // namespace pdiv
