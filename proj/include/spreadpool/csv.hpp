#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace spreadpool {

/// Every CSV written by the tools starts with this line.
inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kCsvVersionPrefix = "# spreadpool-csv-version: ";

struct CsvTable {
  std::vector<std::string> comments;  // emitted as "# ..." lines after the version line
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in columns; throws ConfigError when absent.
  std::size_t column(const std::string& name) const;
};

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Throws IoError when the version line is missing or names another version.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest round-trippable decimal form.
std::string format_double(double v);

}  // namespace spreadpool
