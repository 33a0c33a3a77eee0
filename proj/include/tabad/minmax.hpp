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

#include <span>
#include <string_view>

namespace tabad {

/// Affine map of [min, max] onto [-1, 1]. A constant column (max == min)
/// maps everything to 0 and inverts to min.
struct MinMaxParams {
  double min = 0.0;
  double max = 0.0;

  bool constant() const { return max == min; }
  double transform(double x) const {
    return constant() ? 0.0 : 2.0 * (x - min) / (max - min) - 1.0;
  }
  double inverse(double y) const { return constant() ? min : (y + 1.0) * 0.5 * (max - min) + min; }

  friend bool operator==(const MinMaxParams&, const MinMaxParams&) = default;
};

/// Fits bounds to a non-empty, finite column. Emits a warning through
/// tabad::log for constant columns.
MinMaxParams fit_minmax(std::span<const double> column, std::string_view column_name = {});

}  // namespace tabad
