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

// Deterministic synthetic benchmark.
//
// Every feature is a two-mode Gaussian mixture with one tight mode and one
// broad mode. Anomalies are normal rows in which one or two features that
// sit in the tight mode are pushed 6-10 tight-mode standard deviations away
// from it. The broad modes make plain Euclidean neighbourhoods uneven, while
// a per-mode standardisation exposes the shift.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "tabad/table.hpp"

namespace tabad {

struct SynthConfig {
  std::size_t normal_rows = 5000;
  std::size_t anomaly_rows = 250;
  std::size_t features = 6;
  double min_shift_sigmas = 6.0;
  double max_shift_sigmas = 10.0;
  std::uint64_t seed = 7;
};

inline constexpr const char* kSynthLabelColumn = "label";
inline constexpr double kSynthAnomalyLabel = 1.0;

/// Columns f0..f{features-1} plus "label" (1 = anomaly). Normal rows come
/// first, then anomalies. Normal rows depend only on (features, seed), so
/// variants that differ in anomaly count share their normal rows.
Table make_synthetic(const SynthConfig& config);

}  // namespace tabad
