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

// Per-column encoding of table rows into the generator's output space.
//
// A gmm-encoded column occupies 1 + M slots: a scalar in [-1, 1] followed by
// a one-hot mode indicator. A minmax-encoded column occupies one scalar slot.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabad/gmm.hpp"
#include "tabad/minmax.hpp"
#include "tabad/table.hpp"
#include "tabad/tensor.hpp"

namespace tabad {

enum class ColumnEncoding { kGmm, kMinMax };

ColumnEncoding parse_column_encoding(std::string_view name);
std::string_view to_string(ColumnEncoding e);

struct ColumnSlot {
  std::size_t offset = 0;
  std::size_t modes = 0;  // 0: scalar slot only

  std::size_t width() const { return 1 + modes; }
  friend bool operator==(const ColumnSlot&, const ColumnSlot&) = default;
};

struct OutputLayout {
  std::vector<ColumnSlot> columns;

  std::size_t width() const {
    return columns.empty() ? 0 : columns.back().offset + columns.back().width();
  }
  friend bool operator==(const OutputLayout&, const OutputLayout&) = default;
};

struct ColumnNormalizer {
  std::string name;
  ColumnEncoding encoding = ColumnEncoding::kGmm;
  MinMaxParams minmax;
  /// When set, the GMM is fitted on min-max scaled values.
  bool scale_before_gmm = false;
  GmmColumnModel gmm;

  std::size_t width() const {
    return encoding == ColumnEncoding::kGmm ? 1 + gmm.components() : 1;
  }
  void encode(double x, std::span<double> out) const;
  double decode(std::span<const double> slots) const;

  friend bool operator==(const ColumnNormalizer&, const ColumnNormalizer&) = default;
};

enum class ComponentSelection { kBic, kFixed };

ComponentSelection parse_component_selection(std::string_view name);
std::string_view to_string(ComponentSelection s);

struct PreprocessOptions {
  ColumnEncoding encoding = ColumnEncoding::kGmm;
  bool scale_before_gmm = false;
  /// kBic searches 1..gmm.components; kFixed always fits gmm.components.
  ComponentSelection selection = ComponentSelection::kBic;
  GmmFitOptions gmm;
};

class RowCodec {
 public:
  RowCodec() = default;
  explicit RowCodec(std::vector<ColumnNormalizer> columns);

  const std::vector<ColumnNormalizer>& columns() const { return columns_; }
  const OutputLayout& layout() const { return layout_; }
  std::size_t width() const { return layout_.width(); }
  std::vector<std::string> feature_names() const;

  void encode_row(std::span<const double> raw, std::span<double> out) const;
  Vector encode_row(std::span<const double> raw) const;
  Vector decode_row(std::span<const double> encoded) const;

  /// Encodes the table's columns in codec order (looked up by name).
  Matrix encode(const Table& table) const;

  friend bool operator==(const RowCodec& a, const RowCodec& b) { return a.columns_ == b.columns_; }

 private:
  std::vector<ColumnNormalizer> columns_;
  OutputLayout layout_;
};

/// Fits one normalizer per column of `features`. The component count is
/// capped per column at its number of distinct values.
RowCodec fit_codec(const Table& features, const PreprocessOptions& options);

}  // namespace tabad
