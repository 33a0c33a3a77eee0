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

#include "tabad/synth.hpp"

#include <stdexcept>
#include <vector>

#include "tabad/rng.hpp"

namespace tabad {

namespace {

struct FeatureModes {
  double tight_mean, tight_sd;
  double broad_mean, broad_sd;
  double tight_weight;
};

FeatureModes feature_modes(std::size_t j, Rng& rng) {
  FeatureModes f;
  f.tight_mean = 5.0 * static_cast<double>(j % 3) + rng.uniform();
  f.tight_sd = 0.08 + 0.07 * rng.uniform();
  const double side = (j % 2 == 0) ? 1.0 : -1.0;
  f.broad_mean = f.tight_mean + side * (8.0 + 4.0 * rng.uniform());
  f.broad_sd = 1.5 + 1.0 * rng.uniform();
  f.tight_weight = 0.4 + 0.2 * rng.uniform();
  return f;
}

}  // namespace

Table make_synthetic(const SynthConfig& config) {
  if (config.features == 0) throw std::invalid_argument("synthetic data needs at least one feature");
  if (config.normal_rows == 0) throw std::invalid_argument("synthetic data needs normal rows");
  if (config.min_shift_sigmas > config.max_shift_sigmas) {
    throw std::invalid_argument("synthetic shift range is inverted");
  }

  Rng shape_rng(derive_seed(config.seed, 1));
  std::vector<FeatureModes> modes;
  for (std::size_t j = 0; j < config.features; ++j) modes.push_back(feature_modes(j, shape_rng));

  const std::size_t total = config.normal_rows + config.anomaly_rows;
  std::vector<Vector> cols(config.features, Vector(total));
  std::vector<std::vector<bool>> tight(config.features, std::vector<bool>(total));
  Vector label(total, 0.0);

  auto draw_row = [&](std::size_t r, Rng& rng) {
    for (std::size_t j = 0; j < config.features; ++j) {
      const FeatureModes& f = modes[j];
      const bool is_tight = rng.uniform() < f.tight_weight;
      tight[j][r] = is_tight;
      cols[j][r] = is_tight ? rng.normal(f.tight_mean, f.tight_sd) : rng.normal(f.broad_mean, f.broad_sd);
    }
  };

  Rng normal_rng(derive_seed(config.seed, 2));
  for (std::size_t r = 0; r < config.normal_rows; ++r) draw_row(r, normal_rng);

  Rng anomaly_rng(derive_seed(config.seed, 3));
  for (std::size_t r = config.normal_rows; r < total; ++r) {
    draw_row(r, anomaly_rng);
    label[r] = kSynthAnomalyLabel;
    const std::size_t shifted = 1 + anomaly_rng.below(2);
    for (std::size_t s = 0; s < shifted; ++s) {
      const std::size_t j = anomaly_rng.below(config.features);
      const FeatureModes& f = modes[j];
      const double sigmas = config.min_shift_sigmas +
                            (config.max_shift_sigmas - config.min_shift_sigmas) * anomaly_rng.uniform();
      const double sign = anomaly_rng.uniform() < 0.5 ? -1.0 : 1.0;
      // Re-seat the feature in its tight mode, then push it out.
      cols[j][r] = f.tight_mean + sign * sigmas * f.tight_sd;
      tight[j][r] = true;
    }
  }

  Table table;
  for (std::size_t j = 0; j < config.features; ++j) {
    table.add_column("f" + std::to_string(j), std::move(cols[j]));
  }
  table.add_column(kSynthLabelColumn, std::move(label));
  return table;
}

}  // namespace tabad
