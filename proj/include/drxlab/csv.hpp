#pragma once

// Minimal CSV table: header first, LF line ends, '.' decimal point, reals
// with 9 significant digits.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace drx {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using CsvField = std::variant<std::int64_t, double, std::string>;

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string format_field(const CsvField& f) {
  if (const auto* i = std::get_if<std::int64_t>(&f)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&f)) return format_real(*d);
  return std::get<std::string>(f);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvField>> rows;

  void add(std::vector<CsvField> row) {
    if (row.size() != header.size())
      throw std::logic_error("csv row has " + std::to_string(row.size()) + " fields, header has " +
                             std::to_string(header.size()));
    rows.push_back(std::move(row));
  }

  std::string str() const {
    std::string out;
    auto line = [&](const auto& cells, auto&& fmt) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += fmt(cells[i]);
      }
      out += '\n';
    };
    line(header, [](const std::string& s) { return s; });
    for (const auto& r : rows) line(r, [](const CsvField& f) { return format_field(f); });
    return out;
  }
};

inline void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << table.str();
  f.flush();
  if (!f) throw IoError("write failed for " + path.string());
}

// Splits one CSV line on commas (no quoting; emitted fields never contain
// commas).
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(f, line)) return t;
  t.header = split_csv_line(line);
  while (std::getline(f, line)) {
    std::vector<CsvField> row;
    for (auto& cell : split_csv_line(line)) row.emplace_back(std::move(cell));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace drx
