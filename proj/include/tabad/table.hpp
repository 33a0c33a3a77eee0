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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabad/tensor.hpp"

namespace tabad {

/// Column-major numeric table. Every column has the same length.
struct Table {
  std::vector<std::string> names;
  std::vector<Vector> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t cols() const { return columns.size(); }

  bool has_column(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws std::out_of_range
  const Vector& column(std::string_view name) const { return columns[index_of(name)]; }

  Vector row(std::size_t r) const;
  Table select_rows(std::span<const std::size_t> indices) const;
  Table select_columns(std::span<const std::string> names) const;
  /// rows x cols matrix; requires at least one row and column.
  Matrix to_matrix() const;

  void add_column(std::string name, Vector values);
};

Table drop_columns(const Table& table, std::span<const std::string> names);

struct LabelSplit {
  Table normal;
  Table anomalous;
  std::vector<std::size_t> normal_rows;     // indices into the input table
  std::vector<std::size_t> anomalous_rows;
};

/// Rows whose label equals `anomaly_value` go to the anomalous side.
LabelSplit split_by_label(const Table& table, std::string_view label_column, double anomaly_value);

}  // namespace tabad
