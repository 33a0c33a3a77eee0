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

#include "tabad/codec.hpp"

#include <algorithm>
#include <stdexcept>

#include "tabad/log.hpp"
#include "tabad/rng.hpp"

namespace tabad {

ColumnEncoding parse_column_encoding(std::string_view name) {
  if (name == "gmm") return ColumnEncoding::kGmm;
  if (name == "minmax") return ColumnEncoding::kMinMax;
  throw std::invalid_argument("unknown encoding '" + std::string(name) + "' (expected gmm|minmax)");
}

std::string_view to_string(ColumnEncoding e) {
  return e == ColumnEncoding::kGmm ? "gmm" : "minmax";
}

ComponentSelection parse_component_selection(std::string_view name) {
  if (name == "bic") return ComponentSelection::kBic;
  if (name == "fixed") return ComponentSelection::kFixed;
  throw std::invalid_argument("unknown component selection '" + std::string(name) +
                              "' (expected bic|fixed)");
}

std::string_view to_string(ComponentSelection s) {
  return s == ComponentSelection::kBic ? "bic" : "fixed";
}

void ColumnNormalizer::encode(double x, std::span<double> out) const {
  if (out.size() != width()) throw std::invalid_argument("encode: slot width mismatch for " + name);
  if (encoding == ColumnEncoding::kMinMax) {
    out[0] = minmax.transform(x);
    return;
  }
  const double v = scale_before_gmm ? minmax.transform(x) : x;
  const ModeEncodedValue e = mode_normalize(v, gmm);
  out[0] = e.scalar;
  std::fill(out.begin() + 1, out.end(), 0.0);
  out[1 + e.mode] = 1.0;
}

double ColumnNormalizer::decode(std::span<const double> slots) const {
  if (slots.size() != width()) throw std::invalid_argument("decode: slot width mismatch for " + name);
  if (encoding == ColumnEncoding::kMinMax) return minmax.inverse(slots[0]);
  const double v = mode_denormalize(slots.subspan(1), slots[0], gmm);
  return scale_before_gmm ? minmax.inverse(v) : v;
}

RowCodec::RowCodec(std::vector<ColumnNormalizer> columns) : columns_(std::move(columns)) {
  std::size_t offset = 0;
  for (const auto& c : columns_) {
    const std::size_t modes = c.encoding == ColumnEncoding::kGmm ? c.gmm.components() : 0;
    layout_.columns.push_back(ColumnSlot{offset, modes});
    offset += 1 + modes;
  }
}

std::vector<std::string> RowCodec::feature_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns_) names.push_back(c.name);
  return names;
}

void RowCodec::encode_row(std::span<const double> raw, std::span<double> out) const {
  if (raw.size() != columns_.size() || out.size() != width()) {
    throw std::invalid_argument("encode_row: expected " + std::to_string(columns_.size()) +
                                " raw values into " + std::to_string(width()) + " slots");
  }
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const ColumnSlot& s = layout_.columns[c];
    columns_[c].encode(raw[c], out.subspan(s.offset, s.width()));
  }
}

Vector RowCodec::encode_row(std::span<const double> raw) const {
  Vector out(width());
  encode_row(raw, out);
  return out;
}

Vector RowCodec::decode_row(std::span<const double> encoded) const {
  if (encoded.size() != width()) {
    throw std::invalid_argument("decode_row: expected " + std::to_string(width()) + " slots, got " +
                                std::to_string(encoded.size()));
  }
  Vector out(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const ColumnSlot& s = layout_.columns[c];
    out[c] = columns_[c].decode(encoded.subspan(s.offset, s.width()));
  }
  return out;
}

Matrix RowCodec::encode(const Table& table) const {
  std::vector<const Vector*> cols;
  for (const auto& c : columns_) cols.push_back(&table.column(c.name));
  Matrix out(table.rows(), width());
  Vector raw(columns_.size());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) raw[c] = (*cols[c])[r];
    encode_row(raw, out.row_span(r));
  }
  return out;
}

RowCodec fit_codec(const Table& features, const PreprocessOptions& options) {
  if (features.rows() == 0 || features.cols() == 0) {
    throw std::invalid_argument("fit_codec: empty feature table");
  }
  std::vector<ColumnNormalizer> cols;
  for (std::size_t c = 0; c < features.cols(); ++c) {
    ColumnNormalizer n;
    n.name = features.names[c];
    n.encoding = options.encoding;
    n.minmax = fit_minmax(features.columns[c], n.name);
    if (n.encoding == ColumnEncoding::kGmm) {
      n.scale_before_gmm = options.scale_before_gmm;
      Vector values = features.columns[c];
      if (n.scale_before_gmm) {
        for (double& v : values) v = n.minmax.transform(v);
      }
      GmmFitOptions gopt = options.gmm;
      gopt.seed = derive_seed(options.gmm.seed, c);
      const std::size_t distinct = count_distinct(values);
      if (distinct < gopt.components) {
        log::info("column '" + n.name + "': " + std::to_string(distinct) +
                  " distinct values, capping mixture at that many components");
        gopt.components = distinct;
      }
      n.gmm = options.selection == ComponentSelection::kBic ? fit_gmm_bic(values, gopt).model
                                                            : fit_gmm_em(values, gopt).model;
    }
    cols.push_back(std::move(n));
  }
  return RowCodec(std::move(cols));
}

}  // namespace tabad
