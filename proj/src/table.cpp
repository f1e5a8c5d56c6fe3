#include "solitonscope/table.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "solitonscope/error.hpp"

namespace solitonscope {

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size())
    throw InvalidArgument("table row has " + std::to_string(row.size()) + " values, expected " +
                          std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw InvalidArgument("table has no column '" + name + "'");
}

std::vector<double> Table::values(const std::string& name) const {
  const auto c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
  if (!out) throw InvalidArgument("write failed: " + path.string());
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("missing file " + path.string());
  Table table;
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw InvalidArgument(path.string() + ":1: missing header");
  std::stringstream header(line);
  for (std::string name; std::getline(header, name, ',');) table.columns.push_back(name);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": malformed number");
      row.push_back(v);
      if (next == end) break;
      if (*next != ',') throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": malformed row");
      p = next + 1;
    }
    if (row.size() != table.columns.size())
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(table.columns.size()) + " fields, found " + std::to_string(row.size()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace solitonscope
