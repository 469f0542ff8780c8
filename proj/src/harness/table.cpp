#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "reframe/harness.hpp"

namespace reframe {

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("table '" + name + "' row has " + std::to_string(row.size()) +
                                " cells, expected " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::ostringstream os;
  for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << csv_cell(columns[k]);
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << csv_cell(row[k]);
    os << '\n';
  }
  return os.str();
}

std::string Table::to_text() const {
  std::vector<std::size_t> width(columns.size());
  for (std::size_t k = 0; k < columns.size(); ++k) width[k] = columns[k].size();
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
  }
  std::ostringstream os;
  os << title << '\n';
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      os << (k ? "  " : "") << std::left << std::setw(static_cast<int>(width[k])) << cells[k];
    }
    os << '\n';
  };
  line(columns);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  os << std::string(total + 2 * (columns.empty() ? 0 : columns.size() - 1), '-') << '\n';
  for (const auto& row : rows) line(row);
  return os.str();
}

std::string format_fixed(double value, int digits) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << value;
  return os.str();
}

std::string format_general(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(6) << value;
  return os.str();
}

std::string format_percent(double fraction) { return format_fixed(100.0 * fraction, 1) + "%"; }

}  // namespace reframe
