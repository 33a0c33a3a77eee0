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

#include "tabad/table.hpp"

#include <algorithm>
#include <stdexcept>

namespace tabad {

bool Table::has_column(std::string_view name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::size_t Table::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("unknown column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

Vector Table::row(std::size_t r) const {
  Vector out(cols());
  for (std::size_t c = 0; c < cols(); ++c) out[c] = columns[c].at(r);
  return out;
}

Table Table::select_rows(std::span<const std::size_t> indices) const {
  Table out;
  out.names = names;
  out.columns.resize(cols());
  for (std::size_t c = 0; c < cols(); ++c) {
    out.columns[c].reserve(indices.size());
    for (std::size_t r : indices) out.columns[c].push_back(columns[c].at(r));
  }
  return out;
}

Table Table::select_columns(std::span<const std::string> wanted) const {
  Table out;
  for (const auto& n : wanted) out.add_column(n, column(n));
  return out;
}

Matrix Table::to_matrix() const {
  Matrix m(rows(), cols());
  for (std::size_t c = 0; c < cols(); ++c)
    for (std::size_t r = 0; r < rows(); ++r) m(r, c) = columns[c][r];
  return m;
}

void Table::add_column(std::string name, Vector values) {
  if (has_column(name)) throw std::invalid_argument("duplicate column '" + name + "'");
  if (!columns.empty() && values.size() != rows()) {
    throw std::invalid_argument("column '" + name + "' has " + std::to_string(values.size()) +
                                " rows, table has " + std::to_string(rows()));
  }
  names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

Table drop_columns(const Table& table, std::span<const std::string> names) {
  for (const auto& n : names) {
    if (!table.has_column(n)) throw std::out_of_range("cannot drop unknown column '" + n + "'");
  }
  Table out;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    if (std::find(names.begin(), names.end(), table.names[c]) == names.end()) {
      out.names.push_back(table.names[c]);
      out.columns.push_back(table.columns[c]);
    }
  }
  return out;
}

LabelSplit split_by_label(const Table& table, std::string_view label_column,
                          double anomaly_value) {
  if (!table.has_column(label_column)) {
    throw std::out_of_range("label column '" + std::string(label_column) + "' not found");
  }
  const Vector& labels = table.column(label_column);
  LabelSplit split;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    (labels[r] == anomaly_value ? split.anomalous_rows : split.normal_rows).push_back(r);
  }
  split.normal = table.select_rows(split.normal_rows);
  split.anomalous = table.select_rows(split.anomalous_rows);
  return split;
}

}  // namespace tabad
