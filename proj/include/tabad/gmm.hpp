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
#include <cstdint>
#include <span>
#include <vector>

#include "tabad/tensor.hpp"

namespace tabad {

/// Univariate Gaussian mixture p(x) = sum_i w_i N(x | mean_i, var_i).
struct GmmColumnModel {
  Vector weights;
  Vector means;
  Vector variances;

  std::size_t components() const { return weights.size(); }
  bool fitted() const { return !weights.empty(); }

  /// log p(x)
  double log_density(double x) const;
  /// Posterior responsibilities of every component for x.
  Vector responsibilities(double x) const;
  /// argmax of the posterior; lowest index on ties.
  std::size_t responsible_mode(double x) const;

  friend bool operator==(const GmmColumnModel&, const GmmColumnModel&) = default;
};

struct GmmFitOptions {
  std::size_t components = 10;
  double tol = 1e-6;           // on mean log-likelihood improvement
  std::size_t max_iter = 200;
  double weight_floor = 0.005;  // components lighter than this are pruned
  std::uint64_t seed = 0;
};

struct GmmFit {
  GmmColumnModel model;
  std::vector<double> log_likelihood;  // mean per-sample, one entry per E-step
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t pruned = 0;
};

/// EM with k-means++ seeding of the means and every variance starting at
/// the column variance. Throws if the column has fewer distinct values than
/// components or contains non-finite values.
GmmFit fit_gmm_em(std::span<const double> column, const GmmFitOptions& options);

std::size_t count_distinct(std::span<const double> column);

/// Fits 1..max_components components (capped at the distinct-value count)
/// and keeps the fit with the lowest BIC; `options.components` is the cap.
GmmFit fit_gmm_bic(std::span<const double> column, const GmmFitOptions& options);

/// One-hot mode indicator plus the value standardised within that mode.
struct ModeEncodedValue {
  std::size_t mode = 0;
  std::size_t modes = 0;
  double scalar = 0.0;  // in [-1, 1]

  Vector indicator() const;
};

inline constexpr double kModeScaleSigmas = 4.0;

/// Picks the most responsible mode k and returns
/// clip((x - mean_k) / (4 sd_k), -1, 1).
ModeEncodedValue mode_normalize(double x, const GmmColumnModel& model);

/// scalar * 4 sd_k + mean_k.
double mode_denormalize(const ModeEncodedValue& encoded, const GmmColumnModel& model);

/// Same, from a raw indicator block that must be exactly one-hot.
double mode_denormalize(std::span<const double> indicator, double scalar,
                        const GmmColumnModel& model);

}  // namespace tabad
