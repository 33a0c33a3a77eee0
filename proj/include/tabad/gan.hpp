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
#include <functional>
#include <span>
#include <vector>

#include "tabad/adam.hpp"
#include "tabad/autodiff.hpp"
#include "tabad/codec.hpp"
#include "tabad/gumbel.hpp"
#include "tabad/rng.hpp"
#include "tabad/tensor.hpp"

namespace tabad {

struct DenseLayer {
  Matrix weight;  // out x in
  Matrix bias;    // 1 x out

  std::size_t inputs() const { return weight.cols(); }
  std::size_t outputs() const { return weight.rows(); }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct NetworkShape {
  std::size_t latent_dim = 64;
  std::vector<std::size_t> generator_hidden{128, 128};
  std::vector<std::size_t> discriminator_hidden{128, 64};
  /// Rows the discriminator judges jointly (one logit per pack).
  std::size_t discriminator_pack = 8;
};

/// Generator and discriminator parameters plus the output layout that the
/// generator head is built for.
///
/// The generator's last linear layer emits one logit block per column; the
/// head applies tanh to every scalar slot and the hard Gumbel-softmax to
/// every mode-indicator block, so indicator blocks are always exactly
/// one-hot. The discriminator sees `pack` rows concatenated side by side
/// and ends in a single logit, which discourages the generator from
/// collapsing onto a few modes.
struct GanModel {
  std::size_t latent_dim = 0;
  std::size_t pack = 1;
  OutputLayout layout;
  GumbelConfig gumbel;
  std::vector<DenseLayer> generator;
  std::vector<DenseLayer> discriminator;

  std::size_t output_width() const { return layout.width(); }
  /// Throws if layer shapes do not chain from latent_dim to the layout
  /// width and from pack times the layout width to a single logit.
  void validate() const;

  friend bool operator==(const GanModel&, const GanModel&) = default;
};

/// Randomly initialised model (uniform(-1/sqrt(in), 1/sqrt(in)) weights).
GanModel make_gan(const OutputLayout& layout, const NetworkShape& shape,
                  const GumbelConfig& gumbel, std::uint64_t seed);

/// Deterministic forward pass of one latent vector; always uses the hard head.
Vector generator_forward(std::span<const double> z, const GanModel& model);
/// Batched form: z is n x latent_dim.
Matrix generate(const Matrix& z, const GanModel& model);

/// Realness probability in (0, 1) of a pack made of `row` repeated.
double discriminator_forward(std::span<const double> row, const GanModel& model);
/// Realness probability of each pack; rows.rows() must be a multiple of pack.
Vector discriminator_forward_packs(const Matrix& rows, const GanModel& model);

/// n rows from z ~ N(0, I).
Matrix sample(const GanModel& model, std::size_t n, Rng& rng);

namespace ad {

enum class ParamMode { kConstant, kTrainable };

struct NetworkVars {
  Var output;
  std::vector<Var> params;  // weight, bias per layer, in order
};

/// Generator graph on `tape`. With a non-null `noise_rng` and the soft
/// variant configured, indicator blocks use the noised soft Gumbel-softmax;
/// otherwise the hard straight-through head.
NetworkVars generator_graph(Tape& tape, Var z, const GanModel& model, ParamMode mode,
                            Rng* noise_rng = nullptr);

/// Discriminator graph returning the pre-sigmoid logit, one per pack of
/// consecutive rows ((n / pack) x 1).
NetworkVars discriminator_graph(Tape& tape, Var rows, const GanModel& model, ParamMode mode);

}  // namespace ad

struct TrainConfig {
  std::size_t epochs = 300;
  std::size_t batch_size = 256;
  NetworkShape shape;
  AdamConfig generator_optimizer{2e-4, 0.5, 0.9, 1e-8};
  AdamConfig discriminator_optimizer{2e-4, 0.5, 0.9, 1e-8};
  std::size_t patience = 50;
  std::size_t smoothing_window = 10;
  GumbelConfig gumbel;
  std::uint64_t seed = 0;
};

struct LossHistory {
  std::vector<double> generator;
  std::vector<double> discriminator;
  std::vector<double> smoothed_generator;
  std::size_t stop_epoch = 0;  // epochs actually run (1-based count)
  std::size_t best_epoch = 0;  // 1-based epoch whose parameters were kept
  bool early_stopped = false;

  friend bool operator==(const LossHistory&, const LossHistory&) = default;
};

struct TrainResult {
  GanModel model;
  LossHistory history;
};

/// Optional per-epoch observer (epoch is 1-based).
using EpochCallback = std::function<void(std::size_t epoch, double g_loss, double d_loss)>;

/// Adversarial training on mode-encoded rows (one per matrix row) with
/// non-saturating BCE losses, one discriminator step per generator step and
/// early stopping on the moving average of the generator loss. Returns the
/// parameters of the best smoothed-loss epoch. Throws NonFiniteError with
/// the epoch and batch on divergence.
TrainResult train_gan(const Matrix& encoded_rows, const OutputLayout& layout,
                      const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace tabad
