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

// Oracles and fixtures shared by the unit tests and the acceptance suite.
// Everything here is written independently of the library code it checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tabad/autodiff.hpp"
#include "tabad/codec.hpp"
#include "tabad/gan.hpp"
#include "tabad/rng.hpp"
#include "tabad/synth.hpp"

namespace tabad::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = scale * (2.0 * rng.uniform() - 1.0);
  return m;
}

/// Tolerance rule for gradient checks: 1e-4 relative, or 1e-6 absolute when
/// both values are below 1e-2 in magnitude.
inline bool grad_close(double analytic, double numeric) {
  const double mag = std::max(std::abs(analytic), std::abs(numeric));
  const double diff = std::abs(analytic - numeric);
  if (mag < 1e-2) return diff <= 1e-6;
  return diff / mag <= 1e-4;
}

/// Builds a scalar loss from leaves (one per input matrix).
using LossBuilder = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

struct GradCheck {
  bool ok = true;
  std::size_t checked = 0;
  double worst_error = 0.0;  // largest |analytic - numeric| / max(1, |numeric|)
  std::string first_failure;
};

/// Compares tape gradients with central differences of the forward value.
inline GradCheck check_gradients(const std::vector<Matrix>& inputs, const LossBuilder& build,
                                 double h = 1e-5) {
  auto evaluate = [&](const std::vector<Matrix>& xs) {
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (const auto& x : xs) leaves.push_back(tape.constant(x));
    return tape.value(build(tape, leaves))(0, 0);
  };

  ad::Tape tape;
  std::vector<ad::Var> leaves;
  for (const auto& x : inputs) leaves.push_back(tape.variable(x));
  tape.backward(build(tape, leaves));

  GradCheck out;
  std::vector<Matrix> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Matrix g = tape.grad(leaves[k]);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double x0 = inputs[k].values()[i];
      probe[k].values()[i] = x0 + h;
      const double up = evaluate(probe);
      probe[k].values()[i] = x0 - h;
      const double down = evaluate(probe);
      probe[k].values()[i] = x0;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = g.values()[i];
      ++out.checked;
      out.worst_error =
          std::max(out.worst_error, std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric)));
      if (!grad_close(analytic, numeric) && out.ok) {
        out.ok = false;
        std::ostringstream s;
        s << "input " << k << " element " << i << ": analytic " << analytic << " numeric " << numeric;
        out.first_failure = s.str();
      }
    }
  }
  return out;
}

/// Two-sample Kolmogorov-Smirnov distance by merging sorted samples.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

/// Reference numbers for the exact AUC: P(pos > neg) + 0.5 P(tie) by pairs.
inline double pair_count_auc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

/// k-th smallest Euclidean distance by fully sorting every distance.
inline std::vector<double> naive_knn(const Matrix& train, const Matrix& test, std::size_t k) {
  std::vector<double> out;
  for (std::size_t t = 0; t < test.rows(); ++t) {
    std::vector<double> d;
    for (std::size_t r = 0; r < train.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < train.cols(); ++c) {
        const double diff = test(t, c) - train(r, c);
        s += diff * diff;
      }
      d.push_back(std::sqrt(s));
    }
    std::sort(d.begin(), d.end());
    out.push_back(d[k - 1]);
  }
  return out;
}

/// A small model trained on a two-feature synthetic set; built once.
struct ToyFixture {
  RowCodec codec;
  Matrix encoded;  // training rows
  GanModel model;
  LossHistory history;
};

inline ToyFixture make_toy(std::uint64_t seed = 5, std::size_t epochs = 25) {
  SynthConfig sc;
  sc.normal_rows = 600;
  sc.anomaly_rows = 0;
  sc.features = 2;
  sc.seed = seed;
  Table t = make_synthetic(sc);
  const std::string label = kSynthLabelColumn;
  t = drop_columns(t, std::span<const std::string>(&label, 1));
  ToyFixture f;
  PreprocessOptions po;
  po.gmm.seed = seed;
  f.codec = fit_codec(t, po);
  f.encoded = f.codec.encode(t);
  TrainConfig tc;
  tc.epochs = epochs;
  tc.batch_size = 128;
  tc.seed = seed;
  TrainResult r = train_gan(f.encoded, f.codec.layout(), tc);
  f.model = std::move(r.model);
  f.history = std::move(r.history);
  return f;
}

inline const ToyFixture& toy() {
  static const ToyFixture f = make_toy();
  return f;
}

/// A run small enough to finish in seconds; output_dir goes last so callers
/// can append their own.
inline std::string small_run_config(const std::string& output_dir) {
  return "synth.normal_rows = 240\n"
         "synth.anomaly_rows = 24\n"
         "synth.features = 2\n"
         "train.epochs = 4\n"
         "train.batch_size = 64\n"
         "inversion.steps = 40\n"
         "inversion.restarts = 2\n"
         "output.dir = " + output_dir + "\n";
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tabad_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace tabad::testing
