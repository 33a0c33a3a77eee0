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

#include "tabad/gumbel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tabad {

namespace {

void check_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("gumbel temperature must be positive, got " + std::to_string(t));
  }
}

void check_logits(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("gumbel: empty logits");
  for (double v : logits) {
    if (!std::isfinite(v)) throw NonFiniteError("gumbel: non-finite logit");
  }
}

// softmax(scale * x) written into `out`.
void softmax_into(const double* x, std::size_t n, double scale, double* out) {
  double mx = x[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp((x[i] - mx) * scale);
    total += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= total;
}

// dL/dl = (1/tau) * y ⊙ (g - <g, y>) for y = softmax(l / tau).
void softmax_backward(const double* y, const double* g, std::size_t n, double inv_tau,
                      double* dl) {
  double inner = 0.0;
  for (std::size_t i = 0; i < n; ++i) inner += g[i] * y[i];
  for (std::size_t i = 0; i < n; ++i) dl[i] += inv_tau * y[i] * (g[i] - inner);
}

}  // namespace

GumbelVariant parse_gumbel_variant(std::string_view name) {
  if (name == "hard") return GumbelVariant::kHard;
  if (name == "soft") return GumbelVariant::kSoftNoised;
  throw std::invalid_argument("unknown gumbel variant '" + std::string(name) +
                              "' (expected hard|soft)");
}

std::string_view to_string(GumbelVariant v) {
  return v == GumbelVariant::kHard ? "hard" : "soft";
}

double gumbel_from_uniform(double u) {
  u = std::clamp(u, kGumbelUniformGuard, 1.0 - kGumbelUniformGuard);
  return -std::log(-std::log(u));
}

Vector sample_gumbel(std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample_gumbel: n must be at least 1");
  Vector g(n);
  for (double& v : g) v = gumbel_from_uniform(rng.uniform());
  return g;
}

Vector tempered_softmax(std::span<const double> logits, double temperature) {
  check_temperature(temperature);
  check_logits(logits);
  Vector y(logits.size());
  softmax_into(logits.data(), logits.size(), 1.0 / temperature, y.data());
  return y;
}

Vector gumbel_softmax(std::span<const double> logits, const GumbelConfig& config,
                      std::span<const double> noise) {
  check_temperature(config.temperature);
  check_logits(logits);
  if (noise.size() != logits.size()) {
    throw std::invalid_argument("gumbel_softmax: noise length " + std::to_string(noise.size()) +
                                " does not match " + std::to_string(logits.size()) + " logits");
  }
  Vector h(logits.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = logits[i] + noise[i];
  Vector y(h.size());
  softmax_into(h.data(), h.size(), 1.0 / config.temperature, y.data());
  return y;
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Vector hard_gumbel_softmax(std::span<const double> logits, const GumbelConfig& config) {
  const Vector y = tempered_softmax(logits, config.temperature);
  Vector hard(y.size(), 0.0);
  hard[argmax_lowest(y)] = 1.0;
  return hard;
}

namespace ad {

Var gumbel_softmax(Var logits, double temperature, const Matrix& noise) {
  check_temperature(temperature);
  Tape& t = *logits.tape;
  const Matrix& l = t.value(logits);
  if (!l.same_shape(noise)) {
    throw std::invalid_argument("gumbel_softmax: noise " + shape_string(noise) +
                                " does not match logits " + shape_string(l));
  }
  Matrix y(l.rows(), l.cols());
  std::vector<double> h(l.cols());
  for (std::size_t r = 0; r < l.rows(); ++r) {
    for (std::size_t c = 0; c < l.cols(); ++c) h[c] = l(r, c) + noise(r, c);
    softmax_into(h.data(), h.size(), 1.0 / temperature, y.row_span(r).data());
  }
  const double inv_tau = 1.0 / temperature;
  return t.record(OpKind::kGumbelSoftmax, {&logits, 1}, std::move(y),
                  [inv_tau](Tape& tp, const TapeNode& n) {
                    Matrix* d = tp.grad_target(n.parents[0]);
                    if (!d) return;
                    const Matrix& yv = n.value();
                    for (std::size_t r = 0; r < yv.rows(); ++r) {
                      softmax_backward(yv.row_span(r).data(), n.grad.row_span(r).data(), yv.cols(),
                                       inv_tau, d->row_span(r).data());
                    }
                  });
}

Var hard_gumbel_softmax(Var logits, double temperature) {
  check_temperature(temperature);
  Tape& t = *logits.tape;
  const Matrix& l = t.value(logits);
  // The soft values are kept alongside the one-hot output for the
  // straight-through backward pass.
  Matrix soft(l.rows(), l.cols());
  Matrix hard(l.rows(), l.cols(), 0.0);
  for (std::size_t r = 0; r < l.rows(); ++r) {
    softmax_into(l.row_span(r).data(), l.cols(), 1.0 / temperature, soft.row_span(r).data());
    hard(r, argmax_lowest(soft.row_span(r))) = 1.0;
  }
  const double inv_tau = 1.0 / temperature;
  return t.record(OpKind::kHardGumbelSoftmax, {&logits, 1}, std::move(hard),
                  [inv_tau, soft = std::move(soft)](Tape& tp, const TapeNode& n) {
                    Matrix* d = tp.grad_target(n.parents[0]);
                    if (!d) return;
                    for (std::size_t r = 0; r < soft.rows(); ++r) {
                      softmax_backward(soft.row_span(r).data(), n.grad.row_span(r).data(),
                                       soft.cols(), inv_tau, d->row_span(r).data());
                    }
                  });
}

}  // namespace ad

}  // namespace tabad
