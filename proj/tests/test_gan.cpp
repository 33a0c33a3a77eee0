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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tabad/gan.hpp"

using namespace tabad;
using testing::toy;

namespace {

OutputLayout mixed_layout() {
  // Column 0: two modes, column 1: scalar only, column 2: three modes.
  return OutputLayout{{{0, 2}, {3, 0}, {4, 3}}};
}

void check_layout_contract(std::span<const double> row, const OutputLayout& layout) {
  for (const ColumnSlot& s : layout.columns) {
    CHECK(std::abs(row[s.offset]) < 1.0);
    std::size_t ones = 0;
    for (std::size_t k = 0; k < s.modes; ++k) {
      const double v = row[s.offset + 1 + k];
      CHECK((v == 0.0 || v == 1.0));
      ones += v == 1.0;
    }
    if (s.modes > 0) CHECK(ones == 1);
  }
}

}  // namespace

TEST_CASE("generator output honours the layout and is deterministic") {
  const GanModel m = make_gan(mixed_layout(), NetworkShape{}, GumbelConfig{}, 1);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    Vector z(m.latent_dim);
    for (double& v : z) v = rng.normal(0.0, 3.0);
    const Vector a = generator_forward(z, m);
    CHECK(a.size() == mixed_layout().width());
    check_layout_contract(a, m.layout);
    CHECK(generator_forward(z, m) == a);
  }
  CHECK_THROWS_AS(generator_forward(Vector(3), m), std::invalid_argument);
}

TEST_CASE("zero final layer gives tanh(bias) in every scalar slot") {
  GanModel m = make_gan(mixed_layout(), NetworkShape{}, GumbelConfig{}, 4);
  DenseLayer& last = m.generator.back();
  last.weight.fill(0.0);
  for (std::size_t j = 0; j < last.bias.cols(); ++j) last.bias(0, j) = 0.1 * static_cast<double>(j) - 0.3;
  Rng rng(5);
  Vector z(m.latent_dim);
  for (double& v : z) v = rng.normal();
  const Vector out = generator_forward(z, m);
  for (const ColumnSlot& s : m.layout.columns) CHECK(out[s.offset] == std::tanh(last.bias(0, s.offset)));
}

TEST_CASE("discriminator output is a probability and deterministic") {
  const GanModel m = make_gan(mixed_layout(), NetworkShape{}, GumbelConfig{}, 7);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    Vector row(m.output_width());
    for (double& v : row) v = rng.normal(0.0, 5.0);
    const double p = discriminator_forward(row, m);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(discriminator_forward(row, m) == p);
  }
  CHECK_THROWS_AS(discriminator_forward(Vector(2), m), std::invalid_argument);
}

TEST_CASE("discriminator scores packs of consecutive rows") {
  const GanModel m = make_gan(mixed_layout(), NetworkShape{}, GumbelConfig{}, 9);
  REQUIRE(m.pack == 8);
  Rng rng(10);
  Matrix rows(16, m.output_width());
  for (double& v : rows.values()) v = rng.normal();
  CHECK(discriminator_forward_packs(rows, m).size() == 2);
  CHECK_THROWS_AS(discriminator_forward_packs(Matrix(5, m.output_width()), m), std::invalid_argument);

  Matrix tiled(m.pack, m.output_width());
  for (std::size_t r = 0; r < m.pack; ++r) {
    std::copy(rows.row_span(0).begin(), rows.row_span(0).end(), tiled.row_span(r).begin());
  }
  CHECK(discriminator_forward(rows.row_span(0), m) == discriminator_forward_packs(tiled, m)[0]);
}

TEST_CASE("discriminator input gradient matches finite differences") {
  NetworkShape shape;
  shape.discriminator_pack = 2;
  const GanModel m = make_gan(mixed_layout(), shape, GumbelConfig{}, 11);
  Rng rng(12);
  const Matrix x = testing::random_matrix(4, m.output_width(), rng, 2.0);
  const auto r = testing::check_gradients({x}, [&](ad::Tape& t, const std::vector<ad::Var>& v) {
    return ad::sum(ad::discriminator_graph(t, v[0], m, ad::ParamMode::kConstant).output);
  });
  CHECK_MESSAGE(r.ok, r.first_failure);
}

TEST_CASE("generator parameter gradients match finite differences") {
  NetworkShape shape;
  shape.latent_dim = 3;
  shape.generator_hidden = {5};
  const GanModel m = make_gan(OutputLayout{{{0, 0}, {1, 0}}}, shape, GumbelConfig{}, 13);
  Rng rng(14);
  const Matrix z = testing::random_matrix(3, 3, rng);
  const Matrix target = testing::random_matrix(3, 2, rng, 0.5);
  std::vector<Matrix> inputs{z};
  for (const auto& l : m.generator) {
    inputs.push_back(l.weight);
    inputs.push_back(l.bias);
  }
  const auto r = testing::check_gradients(inputs, [&](ad::Tape& t, const std::vector<ad::Var>& v) {
    ad::Var h = v[0];
    for (std::size_t i = 0; i < m.generator.size(); ++i) {
      h = ad::affine(h, v[1 + 2 * i], v[2 + 2 * i]);
      h = i + 1 < m.generator.size() ? ad::relu(h) : ad::tanh(h);
    }
    return ad::mse(h, t.constant(target));
  });
  CHECK_MESSAGE(r.ok, r.first_failure);
}

TEST_CASE("train_gan bookkeeping") {
  const auto& f = toy();
  SUBCASE("a single epoch") {
    TrainConfig tc;
    tc.epochs = 1;
    tc.batch_size = 64;
    const TrainResult r = train_gan(f.encoded, f.codec.layout(), tc);
    CHECK(r.history.generator.size() == 1);
    CHECK(r.history.discriminator.size() == 1);
    CHECK(r.history.stop_epoch == 1);
    CHECK(r.history.best_epoch == 1);
  }
  SUBCASE("identical seeds give bit-identical histories and parameters") {
    TrainConfig tc;
    tc.epochs = 4;
    tc.batch_size = 64;
    tc.seed = 77;
    const TrainResult a = train_gan(f.encoded, f.codec.layout(), tc);
    const TrainResult b = train_gan(f.encoded, f.codec.layout(), tc);
    CHECK(a.history == b.history);
    CHECK(a.model == b.model);
    tc.seed = 78;
    CHECK_FALSE(train_gan(f.encoded, f.codec.layout(), tc).history == a.history);
  }
  SUBCASE("losses are finite and lengths agree") {
    const LossHistory& h = f.history;
    CHECK(h.generator.size() == h.stop_epoch);
    CHECK(h.discriminator.size() == h.stop_epoch);
    CHECK(h.smoothed_generator.size() == h.stop_epoch);
    for (double v : h.generator) CHECK(std::isfinite(v));
    for (double v : h.discriminator) CHECK(std::isfinite(v));
    CHECK(h.best_epoch <= h.stop_epoch);
  }
  SUBCASE("rejects bad input") {
    TrainConfig tc;
    CHECK_THROWS_AS(train_gan(Matrix(10, 3), f.codec.layout(), tc), std::invalid_argument);
    tc.batch_size = 4;  // smaller than the discriminator pack
    CHECK_THROWS_AS(train_gan(f.encoded, f.codec.layout(), tc), std::invalid_argument);
  }
}

TEST_CASE("early stopping returns the parameters of the best epoch") {
  const auto& f = toy();
  TrainConfig tc;
  tc.epochs = 60;
  tc.batch_size = 64;
  tc.patience = 5;
  tc.smoothing_window = 3;
  tc.seed = 12;
  const TrainResult stopped = train_gan(f.encoded, f.codec.layout(), tc);
  REQUIRE(stopped.history.early_stopped);
  CHECK(stopped.history.stop_epoch == stopped.history.best_epoch + tc.patience);
  const auto& s = stopped.history.smoothed_generator;
  const double best = s[stopped.history.best_epoch - 1];
  for (double v : s) CHECK(v >= best);

  // Oracle: a run cut at the best epoch ends on exactly those parameters.
  tc.epochs = stopped.history.best_epoch;
  tc.patience = 1000;
  const TrainResult cut = train_gan(f.encoded, f.codec.layout(), tc);
  CHECK(cut.history.best_epoch == stopped.history.best_epoch);
  CHECK(cut.model == stopped.model);
}

TEST_CASE("generated rows decode and sampling is reproducible") {
  const auto& f = toy();
  Rng a(3), b(3);
  const Matrix one = sample(f.model, 1, a);
  CHECK(one.rows() == 1);
  check_layout_contract(one.row_span(0), f.model.layout);
  const Matrix batch = sample(f.model, 200, a);
  CHECK(sample(f.model, 1, b) == one);
  CHECK(sample(f.model, 200, b) == batch);
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    check_layout_contract(batch.row_span(r), f.model.layout);
    CHECK_NOTHROW(f.codec.decode_row(batch.row_span(r)));
  }
}

TEST_CASE("generator learns a 1-D normal distribution") {
  Rng rng(1);
  Vector train(5000), held(5000);
  for (double& v : train) v = rng.normal();
  for (double& v : held) v = rng.normal();
  Table t;
  t.add_column("x", train);
  const RowCodec codec = fit_codec(t, PreprocessOptions{});
  TrainConfig tc;
  tc.epochs = 2000;
  tc.seed = 3;
  const TrainResult r = train_gan(codec.encode(t), codec.layout(), tc);

  Rng srng(9);
  const Matrix gen = sample(r.model, 5000, srng);
  Vector values, scalars;
  for (std::size_t i = 0; i < gen.rows(); ++i) {
    values.push_back(codec.decode_row(gen.row_span(i))[0]);
    scalars.push_back(gen(i, 0));
  }
  CHECK(testing::ks_statistic(values, held) < 0.1);

  const Matrix real = codec.encode(t);
  Vector real_scalars;
  for (std::size_t i = 0; i < real.rows(); ++i) real_scalars.push_back(real(i, 0));
  CHECK(testing::ks_statistic(scalars, real_scalars) < 0.15);
}
