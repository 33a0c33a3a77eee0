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

#include "tabad/gan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tabad/log.hpp"

namespace tabad {

namespace {

DenseLayer init_layer(std::size_t in, std::size_t out, Rng& rng) {
  DenseLayer layer{Matrix(out, in), Matrix(1, out)};
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& w : layer.weight.values()) w = (2.0 * rng.uniform() - 1.0) * bound;
  for (double& b : layer.bias.values()) b = (2.0 * rng.uniform() - 1.0) * bound;
  return layer;
}

std::vector<DenseLayer> init_mlp(std::size_t in, std::span<const std::size_t> hidden, std::size_t out,
                                 Rng& rng) {
  std::vector<DenseLayer> layers;
  std::size_t prev = in;
  for (std::size_t h : hidden) {
    layers.push_back(init_layer(prev, h, rng));
    prev = h;
  }
  layers.push_back(init_layer(prev, out, rng));
  return layers;
}

void check_chain(const std::vector<DenseLayer>& layers, std::size_t in, std::size_t out,
                 const char* what) {
  if (layers.empty()) throw std::invalid_argument(std::string(what) + " has no layers");
  std::size_t prev = in;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& l = layers[i];
    if (l.inputs() != prev || l.bias.rows() != 1 || l.bias.cols() != l.outputs()) {
      throw std::invalid_argument(std::string(what) + " layer " + std::to_string(i) +
                                  " has shape " + shape_string(l.weight) + " / bias " +
                                  shape_string(l.bias) + ", expected input width " +
                                  std::to_string(prev));
    }
    prev = l.outputs();
  }
  if (prev != out) {
    throw std::invalid_argument(std::string(what) + " output width " + std::to_string(prev) +
                                " does not match " + std::to_string(out));
  }
}

ad::Var param_leaf(ad::Tape& tape, const Matrix& m, ad::ParamMode mode) {
  return mode == ad::ParamMode::kTrainable ? tape.variable_ref(m) : tape.constant_ref(m);
}

ad::NetworkVars mlp_graph(ad::Tape& tape, ad::Var x, const std::vector<DenseLayer>& layers,
                          ad::ParamMode mode) {
  ad::NetworkVars out;
  ad::Var h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const ad::Var w = param_leaf(tape, layers[i].weight, mode);
    const ad::Var b = param_leaf(tape, layers[i].bias, mode);
    out.params.push_back(w);
    out.params.push_back(b);
    h = ad::affine(h, w, b);
    if (i + 1 < layers.size()) h = ad::relu(h);
  }
  out.output = h;
  return out;
}

// Matrix of the same shape as `like`, filled with Gumbel noise.
Matrix gumbel_noise(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix g(rows, cols);
  for (double& v : g.values()) v = gumbel_from_uniform(rng.uniform());
  return g;
}

std::vector<Matrix*> param_pointers(std::vector<DenseLayer>& layers) {
  std::vector<Matrix*> ptrs;
  for (auto& l : layers) {
    ptrs.push_back(&l.weight);
    ptrs.push_back(&l.bias);
  }
  return ptrs;
}

std::vector<Matrix> collect_grads(const ad::Tape& tape, const std::vector<ad::Var>& params) {
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (ad::Var p : params) grads.push_back(tape.grad(p));
  return grads;
}

}  // namespace

void GanModel::validate() const {
  if (latent_dim == 0) throw std::invalid_argument("latent dimension must be at least 1");
  if (layout.columns.empty()) throw std::invalid_argument("model layout has no columns");
  check_chain(generator, latent_dim, layout.width(), "generator");
  if (pack == 0) throw std::invalid_argument("discriminator pack size must be at least 1");
  check_chain(discriminator, pack * layout.width(), 1, "discriminator");
}

GanModel make_gan(const OutputLayout& layout, const NetworkShape& shape,
                  const GumbelConfig& gumbel, std::uint64_t seed) {
  if (shape.latent_dim == 0) throw std::invalid_argument("latent dimension must be at least 1");
  if (shape.discriminator_pack == 0) throw std::invalid_argument("discriminator pack size must be at least 1");
  Rng rng(derive_seed(seed, 0x6a11));
  GanModel m;
  m.latent_dim = shape.latent_dim;
  m.pack = shape.discriminator_pack;
  m.layout = layout;
  m.gumbel = gumbel;
  m.generator = init_mlp(shape.latent_dim, shape.generator_hidden, layout.width(), rng);
  m.discriminator = init_mlp(m.pack * layout.width(), shape.discriminator_hidden, 1, rng);
  m.validate();
  return m;
}

namespace ad {

NetworkVars generator_graph(Tape& tape, Var z, const GanModel& model, ParamMode mode,
                            Rng* noise_rng) {
  if (tape.value(z).cols() != model.latent_dim) {
    throw std::invalid_argument("generator: latent width " + std::to_string(tape.value(z).cols()) +
                                " does not match model latent dimension " +
                                std::to_string(model.latent_dim));
  }
  NetworkVars net = mlp_graph(tape, z, model.generator, mode);
  const Var logits = net.output;
  const bool soft = noise_rng && model.gumbel.variant == GumbelVariant::kSoftNoised;
  std::vector<Var> parts;
  parts.reserve(2 * model.layout.columns.size());
  for (const ColumnSlot& slot : model.layout.columns) {
    parts.push_back(tanh(slice_cols(logits, slot.offset, 1)));
    if (slot.modes == 0) continue;
    const Var block = slice_cols(logits, slot.offset + 1, slot.modes);
    if (soft) {
      const Matrix noise = gumbel_noise(tape.value(block).rows(), slot.modes, *noise_rng);
      parts.push_back(gumbel_softmax(block, model.gumbel.temperature, noise));
    } else {
      parts.push_back(hard_gumbel_softmax(block, model.gumbel.temperature));
    }
  }
  net.output = parts.size() == 1 ? parts.front() : concat_cols(parts);
  return net;
}

NetworkVars discriminator_graph(Tape& tape, Var rows, const GanModel& model, ParamMode mode) {
  if (tape.value(rows).cols() != model.output_width()) {
    throw std::invalid_argument("discriminator: row width " +
                                std::to_string(tape.value(rows).cols()) + " does not match layout width " +
                                std::to_string(model.output_width()));
  }
  const std::size_t n = tape.value(rows).rows();
  if (n % model.pack != 0) {
    throw std::invalid_argument("discriminator: " + std::to_string(n) +
                                " rows do not fill packs of " + std::to_string(model.pack));
  }
  const Var packed =
      model.pack == 1 ? rows : reshape(rows, n / model.pack, model.pack * model.output_width());
  return mlp_graph(tape, packed, model.discriminator, mode);
}

}  // namespace ad

Matrix generate(const Matrix& z, const GanModel& model) {
  ad::Tape tape;
  const ad::Var zv = tape.constant_ref(z);
  const ad::NetworkVars net = ad::generator_graph(tape, zv, model, ad::ParamMode::kConstant);
  return tape.value(net.output);
}

Vector generator_forward(std::span<const double> z, const GanModel& model) {
  const Matrix out = generate(Matrix::row(z), model);
  return out.storage();
}

Vector discriminator_forward_packs(const Matrix& rows, const GanModel& model) {
  ad::Tape tape;
  const ad::NetworkVars net =
      ad::discriminator_graph(tape, tape.constant_ref(rows), model, ad::ParamMode::kConstant);
  Vector p = tape.value(net.output).storage();
  for (double& logit : p) {
    logit = logit >= 0.0 ? 1.0 / (1.0 + std::exp(-logit)) : std::exp(logit) / (1.0 + std::exp(logit));
  }
  return p;
}

double discriminator_forward(std::span<const double> row, const GanModel& model) {
  Matrix tiled(model.pack, row.size());
  for (std::size_t r = 0; r < model.pack; ++r) std::copy(row.begin(), row.end(), tiled.row_span(r).begin());
  return discriminator_forward_packs(tiled, model).front();
}

Matrix sample(const GanModel& model, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
  Matrix z(n, model.latent_dim);
  for (double& v : z.values()) v = rng.normal();
  return generate(z, model);
}

TrainResult train_gan(const Matrix& data, const OutputLayout& layout, const TrainConfig& config,
                      const EpochCallback& on_epoch) {
  if (data.rows() == 0) throw std::invalid_argument("train_gan: no training rows");
  if (data.cols() != layout.width()) {
    throw std::invalid_argument("train_gan: rows have width " + std::to_string(data.cols()) +
                                ", layout expects " + std::to_string(layout.width()));
  }
  if (config.batch_size < config.shape.discriminator_pack ||
      data.rows() < config.shape.discriminator_pack) {
    throw std::invalid_argument("train_gan: batch size and row count must be at least the pack size");
  }
  if (config.epochs == 0 || config.batch_size == 0 || config.smoothing_window == 0 ||
      config.patience == 0) {
    throw std::invalid_argument("train_gan: epochs, batch size, patience and window must be >= 1");
  }

  TrainResult result;
  GanModel& model = result.model;
  model = make_gan(layout, config.shape, config.gumbel, config.seed);
  GanModel best = model;
  LossHistory& hist = result.history;

  Adam g_opt(config.generator_optimizer);
  Adam d_opt(config.discriminator_optimizer);
  std::vector<Matrix*> g_params = param_pointers(model.generator);
  std::vector<Matrix*> d_params = param_pointers(model.discriminator);

  Rng rng(derive_seed(config.seed, 0x7a1f));
  const std::size_t n = data.rows();
  const std::size_t width = data.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best_smoothed = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  ad::Tape tape;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double g_sum = 0.0, d_sum = 0.0;
    std::size_t used = 0;
    for (std::size_t start = 0, batch = 0; start < n; start += config.batch_size, ++batch) {
      // Trailing rows that cannot fill a pack sit out this batch.
      const std::size_t take = std::min(config.batch_size, n - start);
      const std::size_t bs = take - take % model.pack;
      if (bs == 0) continue;
      used += bs;
      Matrix real(bs, width);
      for (std::size_t r = 0; r < bs; ++r) {
        const auto src = data.row_span(order[start + r]);
        std::copy(src.begin(), src.end(), real.row_span(r).begin());
      }
      try {
        // Discriminator step on a real batch and a detached generated batch.
        Matrix z(bs, model.latent_dim);
        for (double& v : z.values()) v = rng.normal();
        tape.clear();
        const ad::NetworkVars fake_net =
            ad::generator_graph(tape, tape.constant_ref(z), model, ad::ParamMode::kConstant, &rng);
        const Matrix fake = tape.value(fake_net.output);

        tape.clear();
        const ad::NetworkVars d_real = ad::discriminator_graph(tape, tape.constant_ref(real), model,
                                                               ad::ParamMode::kTrainable);
        const ad::NetworkVars d_fake = ad::discriminator_graph(tape, tape.constant_ref(fake), model,
                                                               ad::ParamMode::kTrainable);
        const ad::Var d_loss = ad::add(ad::bce_with_logits(d_real.output, 1.0),
                                       ad::bce_with_logits(d_fake.output, 0.0));
        tape.backward(d_loss);
        std::vector<Matrix> d_grads = collect_grads(tape, d_real.params);
        const std::vector<Matrix> d_grads_fake = collect_grads(tape, d_fake.params);
        for (std::size_t k = 0; k < d_grads.size(); ++k) {
          auto a = d_grads[k].values();
          auto b = d_grads_fake[k].values();
          for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        }
        d_sum += tape.value(d_loss)(0, 0) * static_cast<double>(bs);
        d_opt.step(d_params, d_grads);

        // Generator step with the non-saturating loss -log D(G(z)).
        for (double& v : z.values()) v = rng.normal();
        tape.clear();
        const ad::NetworkVars g_net =
            ad::generator_graph(tape, tape.constant_ref(z), model, ad::ParamMode::kTrainable, &rng);
        const ad::NetworkVars d_on_fake =
            ad::discriminator_graph(tape, g_net.output, model, ad::ParamMode::kConstant);
        const ad::Var g_loss = ad::bce_with_logits(d_on_fake.output, 1.0);
        tape.backward(g_loss);
        g_sum += tape.value(g_loss)(0, 0) * static_cast<double>(bs);
        g_opt.step(g_params, collect_grads(tape, g_net.params));
      } catch (const NonFiniteError& e) {
        throw NonFiniteError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch) + ": " + e.what());
      }
    }

    const double g_epoch = g_sum / static_cast<double>(used);
    const double d_epoch = d_sum / static_cast<double>(used);
    if (!std::isfinite(g_epoch) || !std::isfinite(d_epoch)) {
      throw NonFiniteError("training diverged at epoch " + std::to_string(epoch) +
                           ": non-finite epoch loss");
    }
    hist.generator.push_back(g_epoch);
    hist.discriminator.push_back(d_epoch);
    const std::size_t w = std::min(config.smoothing_window, hist.generator.size());
    const double smoothed =
        std::accumulate(hist.generator.end() - static_cast<std::ptrdiff_t>(w), hist.generator.end(), 0.0) /
        static_cast<double>(w);
    hist.smoothed_generator.push_back(smoothed);
    hist.stop_epoch = epoch;
    if (on_epoch) on_epoch(epoch, g_epoch, d_epoch);

    if (smoothed < best_smoothed) {
      best_smoothed = smoothed;
      hist.best_epoch = epoch;
      best = model;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      hist.early_stopped = true;
      log::info("early stop at epoch " + std::to_string(epoch) + ", keeping epoch " +
                std::to_string(hist.best_epoch));
      break;
    }
  }

  model = std::move(best);
  return result;
}

}  // namespace tabad
