#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace solitonscope {

/// Numeric table with named columns, stored as CSV with a header row.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  Table() = default;
  explicit Table(std::vector<std::string> names) : columns(std::move(names)) {}

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  /// Throws InvalidArgument if the row width does not match the header.
  void add(std::vector<double> row);
  /// Index of a named column; throws InvalidArgument if absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;

  bool operator==(const Table&) const = default;
};

/// 17 significant digits ("%.17g"), so values survive read_csv exactly.
std::string format_double(double v);

void write_csv(const Table& table, const std::filesystem::path& path);
/// Throws InvalidArgument naming the file and line for malformed input.
Table read_csv(const std::filesystem::path& path);

}  // namespace solitonscope
