#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file io.hpp
 * @brief JSONL reading, CSV writing and round-trip number formatting.
 */

#include <json.hpp>

#include <charconv>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace semdiv {

/// Shortest decimal that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JsonlStats {
  std::size_t records = 0;  ///< nonblank lines
  std::size_t skipped = 0;  ///< nonblank lines that failed to parse or convert
  double skipped_fraction() const {
    return records == 0 ? 0.0 : static_cast<double>(skipped) / static_cast<double>(records);
  }
};

/// Calls `sink` for each parsed line. Lines that fail to parse, or for which
/// `sink` throws, are skipped with a warning on `warn`.
inline JsonlStats read_jsonl(const std::string& path, const std::function<void(const nlohmann::json&)>& sink,
                             std::ostream& warn = std::cerr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  JsonlStats stats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++stats.records;
    try {
      sink(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      ++stats.skipped;
      warn << "warning: " << path << ':' << lineno << ": skipped malformed record (" << e.what() << ")\n";
    }
  }
  return stats;
}

inline void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& r : rows) out << r.dump() << '\n';
  if (!out) throw IoError("write failed for " + path);
}

/// Quotes a CSV field when it contains a delimiter, quote or line break.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += csv_field(fields[i]);
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace semdiv
