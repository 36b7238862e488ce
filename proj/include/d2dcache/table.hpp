#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "d2dcache/error.hpp"

namespace d2dcache::io {

using Cell = std::variant<std::string, double, std::uint64_t>;

/// A result table plus the metadata that identifies the run that produced it.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::ConfigParse, "not a number: '" + s + "'");
  }
  return v;
}

inline std::string format_cell(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return std::to_string(std::get<std::uint64_t>(c));
}

/// CSV with a single '#'-prefixed JSON metadata line before the header.
inline std::string to_csv(const Table& table) {
  std::ostringstream os;
  os << "# " << table.metadata.dump() << '\n';
  for (std::size_t k = 0; k < table.columns.size(); ++k) os << (k ? "," : "") << table.columns[k];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << format_cell(row[k]);
    os << '\n';
  }
  return os.str();
}

inline std::string to_json(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::visit([&](const auto& v) { obj[table.columns[k]] = v; }, row[k]);
    }
    rows.push_back(std::move(obj));
  }
  return nlohmann::json{{"metadata", table.metadata}, {"columns", table.columns}, {"rows", rows}}.dump(2) + "\n";
}

/// Parsed form of to_csv output: metadata plus string cells.
struct CsvDocument {
  nlohmann::json metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvDocument parse_csv(const std::string& text) {
  CsvDocument doc;
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
    throw Error(ErrorKind::ConfigParse, "missing '#' metadata line");
  }
  doc.metadata = nlohmann::json::parse(line.substr(2));
  if (!std::getline(is, line)) throw Error(ErrorKind::ConfigParse, "missing header line");
  doc.columns = split_csv_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    doc.rows.push_back(split_csv_line(line));
  }
  return doc;
}

/// Writes through a sibling temporary file and renames it into place, so a
/// failed run never leaves a partial output behind.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    os << contents;
    os.flush();
    if (!os) {
      os.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorKind::Io, "failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move output into place at " + path.string());
  }
}

}  // namespace d2dcache::io
