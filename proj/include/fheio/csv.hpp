#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "fheio/errors.hpp"

namespace fheio {

// Locale-independent shortest round-trip formatting, so CSV output is
// byte-identical across runs and machines.
inline std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

inline std::string format_number(std::uint64_t v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

// Comma-separated table with a header row. Values never need quoting: the
// writers only emit names, keywords and numbers.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != columns.size())
      throw std::runtime_error("csv row width does not match header");
    rows.push_back(std::move(row));
  }

  void write(std::ostream& os) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        os << (i ? "," : "") << row[i];
      os << '\n';
    }
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os)
      throw std::runtime_error("cannot open " + path.string() + " for writing");
    write(os);
    os.flush();
    if (!os) throw std::runtime_error("write failed for " + path.string());
  }

  std::string to_string() const {
    std::ostringstream ss;
    write(ss);
    return ss.str();
  }
};

}  // namespace fheio
