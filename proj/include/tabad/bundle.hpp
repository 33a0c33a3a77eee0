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

// Single-file model bundle.
//
// Layout: the 8-byte magic "TABGANAD", a u32 format version, the payload,
// then a u32 CRC-32 of every preceding byte. Integers are little-endian
// u32/u64, doubles are little-endian IEEE-754 bit patterns and strings are
// a u64 length followed by raw bytes. Saving the same bundle always gives
// the same bytes.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "tabad/codec.hpp"
#include "tabad/gan.hpp"

namespace tabad {

inline constexpr std::uint32_t kBundleVersion = 1;

class BundleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelBundle {
  RowCodec codec;
  GanModel model;
  LossHistory history;
  /// Canonical text of the run configuration that produced the model.
  std::string config_text;

  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

std::string serialize_bundle(const ModelBundle& bundle);
/// Verifies size, checksum, magic and version before decoding anything.
ModelBundle deserialize_bundle(const std::string& bytes);

void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

/// One line per column: encoding, mixture components and range.
std::string describe_codec(const RowCodec& codec);

/// Human-readable summary for `model inspect`.
std::string describe_bundle(const ModelBundle& bundle);

}  // namespace tabad
