#pragma once

#include "common.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace wfset {

//! Shortest decimal that round-trips a double, so identical runs give identical bytes.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

struct Column {
  std::string name, unit;
};

/**
 * @brief Tab-separated table.
 *
 * Layout: `# table: <name>`, one `# constants:` line with the snapshot, the header
 * row `name[unit]…`, then data rows.
 */
class TsvTable {
 public:
  TsvTable(std::string name, std::vector<Column> columns) : name_(std::move(name)), columns_(std::move(columns)) {}

  void constant(const std::string& key, double v) { constants_.emplace_back(key, format_number(v)); }
  void constant(const std::string& key, const std::string& v) { constants_.emplace_back(key, v); }

  TsvTable& row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
      throw Error(ErrorCode::precondition, "row width " + std::to_string(cells.size()) + " does not match table " +
                                               name_ + " (" + std::to_string(columns_.size()) + " columns)");
    rows_.push_back(std::move(cells));
    return *this;
  }

  std::string str() const {
    std::string out = "# table: " + name_ + "\n# constants:";
    for (const auto& [k, v] : constants_) out += " " + k + "=" + v;
    if (constants_.empty()) out += " none";
    out += "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i)
      out += (i ? "\t" : "") + columns_[i].name + "[" + columns_[i].unit + "]";
    out += "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "\t" : "") + r[i];
      out += "\n";
    }
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::config, "cannot write " + path);
    f << str();
  }

  const std::string& name() const { return name_; }
  std::size_t size() const { return rows_.size(); }

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::vector<std::pair<std::string, std::string>> constants_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string cell(double v) { return format_number(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(const std::string& s) { return s; }
inline std::string cell(const char* s) { return s; }
inline std::string cell(bool b) { return b ? "1" : "0"; }

/**
 * @brief `dims: a b c\n` followed by little-endian float64 values in row-major order.
 */
inline std::string raw_dump(const std::vector<std::int64_t>& dims, const std::vector<double>& values) {
  std::int64_t n = 1;
  std::string out = "dims:";
  for (auto d : dims) {
    out += " " + std::to_string(d);
    n *= d;
  }
  out += "\n";
  if (n != static_cast<std::int64_t>(values.size()))
    throw Error(ErrorCode::precondition, "raw dump size does not match its dims");
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
    out.append(bytes, 8);
  }
  return out;
}

struct RawArray {
  std::vector<std::int64_t> dims;
  std::vector<double> values;
};

inline RawArray read_raw(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos || bytes.compare(0, 5, "dims:") != 0)
    throw Error(ErrorCode::config, "raw dump lacks a dims header");
  RawArray a;
  std::istringstream hs(bytes.substr(5, nl - 5));
  std::int64_t d = 0, n = 1;
  while (hs >> d) {
    a.dims.push_back(d);
    n *= d;
  }
  if (bytes.size() - nl - 1 != static_cast<std::size_t>(8 * n))
    throw Error(ErrorCode::config, "raw dump payload does not match its dims");
  for (std::int64_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[nl + 1 + 8 * i + k])) << (8 * k);
    a.values.push_back(std::bit_cast<double>(bits));
  }
  return a;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::config, "cannot write " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace wfset
