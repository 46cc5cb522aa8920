#pragma once

#include "morph/core.hpp"

#include <string>
#include <vector>

namespace morph {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Comma-separated table with a header row. Values are written verbatim, so
/// callers format numbers with format_double for byte-stable output.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  std::string to_string() const;
};

/// Parses a table written by CsvTable::to_string (no quoting). Errors carry
/// the 1-based line number.
CsvTable parse_csv(const std::string& text, const std::string& source);
CsvTable load_csv(const std::string& path);
void save_csv(const std::string& path, const CsvTable& table);

/// Numeric field access with a line-anchored error.
double csv_number(const CsvTable& t, size_t row, int col, const std::string& source);

}  // namespace morph
