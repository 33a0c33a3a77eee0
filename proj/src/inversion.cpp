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

#include "tabad/inversion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "tabad/rng.hpp"

namespace tabad {

namespace {

struct RestartState {
  double best = std::numeric_limits<double>::infinity();
  Vector best_z;
  std::vector<double> trajectory;
  bool done = false;
};

// Runs all restarts (rows of z) together. Rows never interact: every kernel
// computes each row on its own and Adam is element-wise, so a row's result
// is the same as running it alone.
std::vector<RestartState> run_restarts(std::span<const double> x, const GanModel& model,
                                       const InversionConfig& config, Matrix z,
                                       std::size_t& steps_run) {
  const std::size_t k = z.rows();
  Matrix target(k, x.size());
  for (std::size_t r = 0; r < k; ++r) std::copy(x.begin(), x.end(), target.row_span(r).begin());

  std::vector<RestartState> states(k);
  Adam opt(config.optimizer);
  Matrix* params[] = {&z};
  ad::Tape tape;
  steps_run = 0;

  // Step s evaluates the loss at the current z, then moves it; the final
  // pass (s == steps) only evaluates.
  for (std::size_t s = 0; s <= config.steps; ++s) {
    tape.clear();
    const ad::Var zv = tape.variable_ref(z);
    const ad::NetworkVars g = ad::generator_graph(tape, zv, model, ad::ParamMode::kConstant);
    const ad::Var per_row = ad::row_mse(g.output, tape.constant_ref(target));
    const Matrix& losses = tape.value(per_row);

    bool all_done = true;
    for (std::size_t r = 0; r < k; ++r) {
      RestartState& st = states[r];
      if (losses(r, 0) < st.best) {
        st.best = losses(r, 0);
        st.best_z.assign(z.row_span(r).begin(), z.row_span(r).end());
      }
      st.trajectory.push_back(st.best);
      const std::size_t t = st.trajectory.size();
      if (st.best < config.tolerance) st.done = true;
      if (t > config.stall_window &&
          st.trajectory[t - 1 - config.stall_window] - st.best < config.tolerance) {
        st.done = true;
      }
      all_done = all_done && st.done;
    }
    if (all_done || s == config.steps) break;

    tape.backward(ad::sum(per_row));
    const Matrix grad = tape.grad(zv);
    opt.step(params, {&grad, 1});
    ++steps_run;
  }
  return states;
}

Matrix initial_latents(const GanModel& model, const InversionConfig& config, std::uint64_t row_seed) {
  Matrix z(config.restarts, model.latent_dim);
  for (std::size_t r = 0; r < config.restarts; ++r) {
    Rng rng(derive_seed(row_seed, r));
    for (double& v : z.row_span(r)) v = rng.normal();
  }
  return z;
}

}  // namespace

InversionResult invert_latent_from(std::span<const double> x, const GanModel& model,
                                   const InversionConfig& config, const Matrix& initial_z) {
  if (x.size() != model.output_width()) {
    throw std::invalid_argument("invert_latent: row width " + std::to_string(x.size()) +
                                " does not match model layout width " +
                                std::to_string(model.output_width()));
  }
  if (config.steps == 0 || config.restarts == 0) {
    throw std::invalid_argument("invert_latent: steps and restarts must be at least 1");
  }
  if (initial_z.cols() != model.latent_dim || initial_z.rows() == 0) {
    throw std::invalid_argument("invert_latent: initial latents have shape " +
                                shape_string(initial_z));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw NonFiniteError("invert_latent: non-finite target value");
  }

  const std::size_t k = initial_z.rows();
  std::vector<RestartState> states;
  std::vector<bool> failed(k, false);
  std::size_t steps_run = 0;
  try {
    states = run_restarts(x, model, config, initial_z, steps_run);
  } catch (const NonFiniteError&) {
    // Isolate the diverging restart(s) and keep the rest.
    states.assign(k, RestartState{});
    std::size_t most_steps = 0;
    for (std::size_t r = 0; r < k; ++r) {
      Matrix z0(1, initial_z.cols());
      std::copy(initial_z.row_span(r).begin(), initial_z.row_span(r).end(), z0.row_span(0).begin());
      try {
        std::size_t steps = 0;
        states[r] = run_restarts(x, model, config, std::move(z0), steps).front();
        most_steps = std::max(most_steps, steps);
      } catch (const NonFiniteError&) {
        failed[r] = true;
      }
    }
    steps_run = most_steps;
  }

  InversionResult result;
  result.steps_run = steps_run;
  std::size_t winner = k;
  for (std::size_t r = 0; r < k; ++r) {
    if (failed[r]) {
      result.restart_losses.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    result.restart_losses.push_back(states[r].best);
    if (winner == k || states[r].best < states[winner].best) winner = r;
  }
  if (winner == k) throw NonFiniteError("invert_latent: every restart diverged");
  result.z = std::move(states[winner].best_z);
  result.loss = states[winner].best;
  result.trajectory = std::move(states[winner].trajectory);
  return result;
}

InversionResult invert_latent(std::span<const double> x, const GanModel& model,
                              const InversionConfig& config, std::uint64_t row_seed) {
  if (config.restarts == 0) throw std::invalid_argument("invert_latent: restarts must be at least 1");
  return invert_latent_from(x, model, config, initial_latents(model, config, row_seed));
}

AnomalyReport anomaly_score(std::span<const double> x, const GanModel& model, const RowCodec& codec,
                            const InversionConfig& config, std::uint64_t row_seed,
                            std::span<const double> raw) {
  if (codec.layout() != model.layout) {
    throw std::invalid_argument("anomaly_score: codec layout does not match the model");
  }
  InversionResult inv = invert_latent(x, model, config, row_seed);

  AnomalyReport rep;
  rep.reconstruction = generator_forward(inv.z, model);
  rep.score = mse(rep.reconstruction, x);
  rep.z = std::move(inv.z);
  rep.trajectory = std::move(inv.trajectory);
  rep.encoded_abs_diff.resize(x.size());
  rep.encoded_sq_diff.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = rep.reconstruction[j] - x[j];
    rep.encoded_abs_diff[j] = std::abs(d);
    rep.encoded_sq_diff[j] = d * d;
  }

  const Vector decoded = codec.decode_row(rep.reconstruction);
  Vector original;
  if (raw.empty()) {
    original = codec.decode_row(x);
  } else {
    if (raw.size() != codec.columns().size()) {
      throw std::invalid_argument("anomaly_score: raw row has " + std::to_string(raw.size()) +
                                  " values, codec has " + std::to_string(codec.columns().size()) +
                                  " columns");
    }
    original.assign(raw.begin(), raw.end());
  }
  const auto& slots = codec.layout().columns;
  rep.feature_abs_diff.resize(slots.size());
  rep.feature_sq_error.resize(slots.size());
  for (std::size_t c = 0; c < slots.size(); ++c) {
    rep.feature_abs_diff[c] = std::abs(decoded[c] - original[c]);
    double acc = 0.0;
    for (std::size_t j = 0; j < slots[c].width(); ++j) acc += rep.encoded_sq_diff[slots[c].offset + j];
    rep.feature_sq_error[c] = acc;
  }
  return rep;
}

std::vector<AnomalyReport> score_batch(const Matrix& rows, const GanModel& model,
                                       const RowCodec& codec, const InversionConfig& config,
                                       const Matrix* raw) {
  const std::size_t n = rows.rows();
  std::vector<AnomalyReport> out(n);
  if (n == 0) return out;
  if (raw && raw->rows() != n) {
    throw std::invalid_argument("score_batch: raw rows do not match encoded rows");
  }

  std::size_t threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  threads = std::clamp<std::size_t>(threads, 1, n);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const auto raw_row = raw ? raw->row_span(i) : std::span<const double>{};
        out[i] = anomaly_score(rows.row_span(i), model, codec, config, config.seed + i, raw_row);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace tabad
