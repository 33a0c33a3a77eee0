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

#include "tabad/minmax.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tabad/log.hpp"
#include "tabad/tensor.hpp"

namespace tabad {

MinMaxParams fit_minmax(std::span<const double> column, std::string_view column_name) {
  if (column.empty()) throw std::invalid_argument("fit_minmax: empty column");
  if (!std::all_of(column.begin(), column.end(), [](double v) { return std::isfinite(v); })) {
    throw NonFiniteError("fit_minmax: non-finite value in column '" + std::string(column_name) + "'");
  }
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  MinMaxParams p{*lo, *hi};
  if (p.constant()) {
    log::warn("column '" + std::string(column_name) + "' is constant (" + std::to_string(p.min) +
              "); min-max scaling maps it to 0");
  }
  return p;
}

}  // namespace tabad
