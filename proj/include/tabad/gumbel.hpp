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

// Gumbel-softmax activations.
//
// Two variants are provided:
//   soft:  y = softmax((l + g) / tau) with Gumbel noise g, which the caller
//          supplies so it owns the RNG state;
//   hard:  y_soft = softmax(l / tau) with no noise at all, forward value is
//          the one-hot of argmax(y_soft) and the backward pass uses the
//          gradient of y_soft (straight-through). Identical logits always give
//          identical outputs.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "tabad/autodiff.hpp"
#include "tabad/rng.hpp"
#include "tabad/tensor.hpp"

namespace tabad {

enum class GumbelVariant { kSoftNoised, kHard };

GumbelVariant parse_gumbel_variant(std::string_view name);
std::string_view to_string(GumbelVariant v);

struct GumbelConfig {
  double temperature = 0.2;
  GumbelVariant variant = GumbelVariant::kHard;
  friend bool operator==(const GumbelConfig&, const GumbelConfig&) = default;
};

inline constexpr double kGumbelUniformGuard = 1e-12;

/// -log(-log(u)) with u clamped to [guard, 1 - guard].
double gumbel_from_uniform(double u);

Vector sample_gumbel(std::size_t n, Rng& rng);

/// softmax(logits / temperature), max-subtracted.
Vector tempered_softmax(std::span<const double> logits, double temperature);

Vector gumbel_softmax(std::span<const double> logits, const GumbelConfig& config,
                      std::span<const double> noise);

/// Forward value of the hard variant: one-hot at the argmax of the tempered
/// softmax, lowest index on ties.
Vector hard_gumbel_softmax(std::span<const double> logits, const GumbelConfig& config);

std::size_t argmax_lowest(std::span<const double> values);

namespace ad {

/// Row-wise soft variant on a tape; `noise` has the shape of `logits`.
Var gumbel_softmax(Var logits, double temperature, const Matrix& noise);

/// Row-wise hard variant with straight-through gradient.
Var hard_gumbel_softmax(Var logits, double temperature);

}  // namespace ad

}  // namespace tabad
