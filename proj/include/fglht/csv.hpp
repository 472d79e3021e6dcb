#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fglht/error.hpp"
#include "fglht/sample.hpp"

namespace fglht {

/// Maps the five required roles onto column names of a long-format CSV.
struct ColumnMap {
  std::string group = "group";
  std::string subject = "subject";
  std::string component = "component";
  std::string time = "time";
  std::string value = "value";
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{}
                                         : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(std::string_view s, long line_no, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": cannot parse " +
                     what + " value '" + std::string(s) + "'");
  }
  return v;
}

inline int parse_int(std::string_view s, long line_no, const char* what) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": cannot parse " +
                     what + " value '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

/// Reads a long-format CSV (`group,subject,component,time,value` by default)
/// into one record per data row. Numeric parsing is locale-independent.
inline std::vector<Observation> ingest_long_csv(const std::string& path,
                                                const ColumnMap& cols = {}) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaError("'" + path + "' is empty");
  }
  const auto header = detail::split_csv_line(line);
  const auto find_col = [&](const std::string& name) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == name) return static_cast<long>(j);
    }
    throw SchemaError("'" + path + "': missing column '" + name + "'");
  };
  const long cg = find_col(cols.group);
  const long cs = find_col(cols.subject);
  const long cc = find_col(cols.component);
  const long ct = find_col(cols.time);
  const long cv = find_col(cols.value);

  std::vector<Observation> records;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    const long needed = std::max({cg, cs, cc, ct, cv});
    if (static_cast<long>(fields.size()) <= needed) {
      throw ParseError("line " + std::to_string(line_no) + ": expected at least " +
                       std::to_string(needed + 1) + " fields, got " +
                       std::to_string(fields.size()));
    }
    Observation o;
    o.group = fields[static_cast<std::size_t>(cg)];
    o.subject = fields[static_cast<std::size_t>(cs)];
    o.component = detail::parse_int(fields[static_cast<std::size_t>(cc)], line_no,
                                    "component");
    o.time = detail::parse_double(fields[static_cast<std::size_t>(ct)], line_no,
                                  "time");
    o.value = detail::parse_double(fields[static_cast<std::size_t>(cv)], line_no,
                                   "value");
    records.push_back(std::move(o));
  }
  return records;
}

namespace detail {

inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Writes one CSV per group into `dir`: rows are subject x component with
/// columns `subject,component,v1..vM`. Returns the written paths.
inline std::vector<std::string> export_gridded(const SampleSet& s,
                                               const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> paths;
  for (const auto& g : s.groups()) {
    const std::string path = (fs::path(dir) / (g.id() + ".csv")).string();
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    out << "subject,component";
    for (int m = 1; m <= g.points(); ++m) out << ",v" << m;
    out << "\n";
    for (int i = 0; i < g.size(); ++i) {
      for (int h = 0; h < g.components(); ++h) {
        out << g.subjects()[static_cast<std::size_t>(i)] << "," << (h + 1);
        for (int m = 0; m < g.points(); ++m) {
          out << "," << detail::format_full(g.value(i, h, m));
        }
        out << "\n";
      }
    }
    paths.push_back(path);
  }
  return paths;
}

}  // namespace fglht
