/* Copyright (c) 2026 The tabad Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "tabad/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace tabad {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw CsvError("unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

Table parse_csv(std::istream& in, const CsvReadOptions& options, std::string_view source) {
  const std::string where(source);
  std::string line;
  std::size_t line_no = 0;
  // Skip a UTF-8 byte order mark and leading blank lines.
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw CsvError(where + ": empty file (no header row)");

  std::vector<std::string> header;
  try {
    header = split_csv_record(line);
  } catch (const CsvError& e) {
    throw CsvError(where + ": line " + std::to_string(line_no) + ": " + e.what());
  }
  for (auto& h : header) h = std::string(trim(h));
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].empty()) {
      throw CsvError(where + ": header column " + std::to_string(i + 1) + " has no name");
    }
    if (std::find(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(i), header[i]) !=
        header.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw CsvError(where + ": duplicate column '" + header[i] + "'");
    }
  }
  auto present = [&](const std::string& name) {
    return std::find(header.begin(), header.end(), name) != header.end();
  };
  for (const auto& name : options.required) {
    if (!present(name)) throw CsvError(where + ": missing column '" + name + "'");
  }
  for (const auto& name : options.skip) {
    if (!present(name)) throw CsvError(where + ": missing column '" + name + "'");
  }

  Table table;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (std::find(options.skip.begin(), options.skip.end(), header[i]) != options.skip.end()) continue;
    keep.push_back(i);
    table.names.push_back(header[i]);
    table.columns.emplace_back();
  }

  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++row;
    std::vector<std::string> fields;
    try {
      fields = split_csv_record(line);
    } catch (const CsvError& e) {
      throw CsvError(where + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    if (fields.size() != header.size()) {
      throw CsvError(where + ": line " + std::to_string(line_no) + " (row " + std::to_string(row) +
                     ") has " + std::to_string(fields.size()) + " fields, header has " +
                     std::to_string(header.size()));
    }
    for (std::size_t k = 0; k < keep.size(); ++k) {
      double v = 0.0;
      const std::string& cell = fields[keep[k]];
      if (!parse_number(cell, v) || (!options.allow_nonfinite && !std::isfinite(v))) {
        throw CsvError(where + ": row " + std::to_string(row) + " (line " + std::to_string(line_no) +
                       "), column '" + header[keep[k]] + "': cannot parse '" + cell +
                       "' as a finite number");
      }
      table.columns[k].push_back(v);
    }
  }
  if (row == 0) throw CsvError(where + ": no data rows");
  return table;
}

Table read_csv(const std::string& path, const CsvReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open '" + path + "'");
  return parse_csv(in, options, path);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.cols(); ++c) {
    if (c) out << ',';
    out << table.names[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      if (c) out << ',';
      out << format_double(table.columns[c][r]);
    }
    out << '\n';
  }
}

void write_csv(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot write '" + path + "'");
  write_csv(out, table);
  if (!out.flush()) throw CsvError("write to '" + path + "' failed");
}

}  // namespace tabad
