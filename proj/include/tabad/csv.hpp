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

// Numeric CSV input and output.
//
// Files carry a header row, use ',' as the separator and '.' as the decimal
// point. Fields may be double-quoted. Columns listed in `skip` are never
// parsed, so they may hold text (day names, timestamps).

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tabad/table.hpp"

namespace tabad {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvReadOptions {
  std::vector<std::string> skip;  // columns left unparsed and left out
  /// Columns that must be present (checked before any cell is parsed).
  std::vector<std::string> required;
  /// Accept "inf"/"nan" cells; off for data files, on for re-reading reports.
  bool allow_nonfinite = false;
};

/// Parses a whole CSV document. `source` names it in error messages.
Table parse_csv(std::istream& in, const CsvReadOptions& options, std::string_view source);
Table read_csv(const std::string& path, const CsvReadOptions& options = {});

/// Shortest text that parses back to exactly the same double.
std::string format_double(double v);

/// Writes `table` with a header row; values via format_double.
void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::string& path, const Table& table);

/// Splits one CSV record, honouring double quotes ("" inside quotes is a
/// literal quote).
std::vector<std::string> split_csv_record(std::string_view line);

}  // namespace tabad
