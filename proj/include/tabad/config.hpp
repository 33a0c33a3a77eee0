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

// Run configuration.
//
// The file format is flat `key = value` text. Keys carry a section prefix
// (data., train., ...), '#' starts a comment line and every key has a
// default, so an empty file is a complete configuration. The same text
// form is embedded in model bundles.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tabad/codec.hpp"
#include "tabad/gan.hpp"
#include "tabad/inversion.hpp"
#include "tabad/synth.hpp"

namespace tabad {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Used when no seed is configured. Fixed, never taken from the clock.
inline constexpr std::uint64_t kDefaultSeed = 42;

struct DataConfig {
  /// CSV input; empty means the built-in synthetic benchmark (synth.*).
  std::string path;
  std::string label_column = "label";
  double anomaly_value = 1.0;
  std::vector<std::string> drop;
  /// Share of the normal rows held out for evaluation.
  double test_fraction = 0.2;
};

struct EvalConfig {
  std::size_t knn_k = 5;
};

struct RunConfig {
  DataConfig data;
  SynthConfig synth;
  PreprocessOptions preprocess;
  TrainConfig train;
  InversionConfig inversion;
  EvalConfig eval;
  std::string output_dir = "tabad_out";
  std::uint64_t seed = kDefaultSeed;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Parses config text on top of the defaults. `source` names the text in
/// error messages. Unknown or repeated keys are errors.
RunConfig parse_config(std::string_view text, std::string_view source = "config");

/// "demo" (or an empty string) gives the defaults; anything else is a path.
RunConfig load_config(const std::string& path_or_preset);

/// Canonical text: every key in a fixed order. Parsing it back gives a
/// config with the same text.
std::string to_text(const RunConfig& config);

/// Sets one key from its text value.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string help;
};

/// Every recognised key with its default and a one-line description.
std::vector<ConfigKey> config_reference();

}  // namespace tabad
