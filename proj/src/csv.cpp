#include "morph/csv.hpp"

#include "morph/json_io.hpp"

#include <charconv>
#include <sstream>

namespace morph {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::string CsvTable::to_string() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ParseError(source + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       lineno, 1);
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw ParseError(source + ": empty table");
  return t;
}

CsvTable load_csv(const std::string& path) { return parse_csv(read_text_file(path), path); }

void save_csv(const std::string& path, const CsvTable& table) { write_text_file(path, table.to_string()); }

double csv_number(const CsvTable& t, size_t row, int col, const std::string& source) {
  const std::string& s = t.rows.at(row).at(static_cast<size_t>(col));
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    // Header is line 1; blank lines are not tracked, which tools never emit.
    throw ParseError(source + ": '" + t.header[col] + "' is not a number: '" + s + "'",
                     static_cast<int>(row) + 2, 1);
  }
  return v;
}

}  // namespace morph
