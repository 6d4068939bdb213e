#include "spreadpool/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "spreadpool/errors.hpp"

namespace spreadpool {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ConfigError("CSV has no column '" + name + "'");
}

void write_csv(std::ostream& out, const CsvTable& table) {
  out << kCsvVersionPrefix << kCsvSchemaVersion << '\n';
  for (const std::string& c : table.comments) out << "# " << c << '\n';
  write_row(out, table.columns);
  for (const auto& row : table.rows) write_row(out, row);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(out, table);
  if (!out) throw IoError("failed writing " + path.string());
}

CsvTable parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kCsvVersionPrefix, 0) != 0) {
    throw IoError("CSV is missing the schema version line");
  }
  const std::string version = line.substr(std::string(kCsvVersionPrefix).size());
  if (version != std::to_string(kCsvSchemaVersion)) {
    throw IoError("unsupported CSV schema version '" + version + "'");
  }
  CsvTable table;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      table.comments.push_back(line.substr(2));
    } else if (!have_header) {
      table.columns = split(line);
      have_header = true;
    } else {
      table.rows.push_back(split(line));
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_csv(in);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace spreadpool
