#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wjl/error.hpp"

namespace wjl::harness {

/// Experiment CSVs start with one metadata line, `# ` followed by a JSON
/// object, then a header row and data rows. Fields never contain commas.
struct CsvTable {
  nlohmann::json metadata;  ///< null when the file has no metadata line
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw InvalidArgument("csv: no column named \"" + std::string(name) + "\"");
  }
};

inline std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (line.front() == '#') {
      if (!have_header && table.metadata.is_null()) {
        try {
          table.metadata = nlohmann::json::parse(line.substr(1));
        } catch (const nlohmann::json::exception& e) {
          throw FormatError(std::string("csv: bad metadata line: ") + e.what());
        }
      }
      continue;
    }
    auto fields = split_csv_line(line);
    if (!have_header) {
      table.columns = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.columns.size())
      throw FormatError("csv: row has " + std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(table.columns.size()));
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw FormatError("csv: no header row");
  return table;
}

inline CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_csv(in);
}

/// Writes `bytes` to `path`, creating parent directories.
inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace wjl::harness
