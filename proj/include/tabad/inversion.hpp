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

// Latent inversion scoring.
//
// For a query row x (mode-encoded), Adam searches the generator's latent
// space for z minimising MSE(G(z), x), with gradients passing through the
// hard Gumbel blocks via the straight-through estimator. The best final MSE
// over several seeded restarts is the anomaly score.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tabad/adam.hpp"
#include "tabad/codec.hpp"
#include "tabad/gan.hpp"
#include "tabad/tensor.hpp"

namespace tabad {

struct InversionConfig {
  std::size_t steps = 500;
  std::size_t restarts = 3;
  AdamConfig optimizer{1e-2, 0.9, 0.999, 1e-8};
  /// A restart is finished once its best loss drops below `tolerance` or
  /// improves by less than `tolerance` over `stall_window` steps.
  double tolerance = 1e-8;
  std::size_t stall_window = 50;
  std::uint64_t seed = 0;
  /// Worker threads for score_batch; 0 picks the hardware concurrency.
  std::size_t threads = 1;
};

struct InversionResult {
  Vector z;                         // best latent vector found
  double loss = 0.0;                // MSE(G(z), x) at z
  std::vector<double> trajectory;   // best-so-far loss of the winning restart
  std::vector<double> restart_losses;  // final best loss per restart; NaN if it diverged
  std::size_t steps_run = 0;
};

/// Restart r starts from z ~ N(0, I) drawn from a stream derived from
/// (row_seed, r). Throws NonFiniteError only if every restart diverged.
InversionResult invert_latent(std::span<const double> x, const GanModel& model,
                              const InversionConfig& config, std::uint64_t row_seed);

/// Same, starting from the given latents (one restart per row).
InversionResult invert_latent_from(std::span<const double> x, const GanModel& model,
                                   const InversionConfig& config, const Matrix& initial_z);

struct AnomalyReport {
  double score = 0.0;   // MSE in encoded space
  Vector z;
  Vector reconstruction;    // G(z), encoded
  Vector encoded_abs_diff;  // |G(z)_j - x_j| per encoded slot
  Vector encoded_sq_diff;   // squared; sums to score * width
  Vector feature_abs_diff;  // per original column, in data units
  Vector feature_sq_error;  // squared encoded error summed over each column's slots
  std::vector<double> trajectory;
  bool flagged = false;
};

/// Scores one encoded row. `raw` (original data units) is used for the
/// per-column differences when given; otherwise x is decoded through `codec`.
AnomalyReport anomaly_score(std::span<const double> x, const GanModel& model, const RowCodec& codec,
                            const InversionConfig& config, std::uint64_t row_seed,
                            std::span<const double> raw = {});

/// Row i is scored with seed config.seed + i, so results do not depend on
/// batch order or thread count. `raw`, when non-null, has one row per input row.
std::vector<AnomalyReport> score_batch(const Matrix& rows, const GanModel& model,
                                       const RowCodec& codec, const InversionConfig& config,
                                       const Matrix* raw = nullptr);

}  // namespace tabad
