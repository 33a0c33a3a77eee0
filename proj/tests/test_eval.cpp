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
#include <limits>

#include "support.hpp"
#include "tabad/eval.hpp"

using namespace tabad;

namespace {

LabeledScores random_scores(Rng& rng, std::size_t n, bool with_ties) {
  LabeledScores d;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i < 2 ? static_cast<int>(i) : rng.uniform() < 0.3;
    double s = rng.normal(label ? 1.0 : 0.0, 1.0);
    if (with_ties) s = std::round(s * 2.0) / 2.0;
    d.scores.push_back(s);
    d.labels.push_back(label);
  }
  return d;
}

}  // namespace

TEST_CASE("auc on hand-made cases") {
  CHECK(roc_curve({{0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}}).auc == 1.0);
  CHECK(roc_curve({{0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}}).auc == 0.0);
  CHECK(roc_curve({{3, 3, 3, 3, 3}, {0, 1, 0, 1, 0}}).auc == 0.5);
  CHECK(roc_curve({{1, 2, 2, 3}, {0, 1, 0, 1}}).auc == 0.875);
}

TEST_CASE("auc equals the pair-count probability") {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const LabeledScores d = random_scores(rng, 40, t % 2 == 0);
    CHECK(roc_curve(d).auc == doctest::Approx(testing::pair_count_auc(d.scores, d.labels)).epsilon(1e-12));
  }
}

TEST_CASE("auc is invariant to strictly increasing transforms") {
  Rng rng(9);
  LabeledScores d = random_scores(rng, 60, true);
  const double before = roc_curve(d).auc;
  for (double& s : d.scores) s = s * s * s + 4.0;
  CHECK(roc_curve(d).auc == before);
}

TEST_CASE("roc curve endpoints and monotonicity") {
  Rng rng(10);
  const RocCurve c = roc_curve(random_scores(rng, 50, true));
  REQUIRE(c.points.size() >= 2);
  CHECK(c.points.front().threshold == std::numeric_limits<double>::infinity());
  CHECK(c.points.front().tpr == 0.0);
  CHECK(c.points.front().fpr == 0.0);
  CHECK(c.points.back().tpr == 1.0);
  CHECK(c.points.back().fpr == 1.0);
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    CHECK(c.points[i].threshold < c.points[i - 1].threshold);
    CHECK(c.points[i].tpr >= c.points[i - 1].tpr);
    CHECK(c.points[i].fpr >= c.points[i - 1].fpr);
  }
}

TEST_CASE("roc input validation") {
  CHECK_THROWS_AS(roc_curve({{1, 2}, {1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(roc_curve({{1, 2}, {0, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(roc_curve({{1, 2, 3}, {0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(roc_curve({{1, NAN}, {0, 1}}), NonFiniteError);
}

TEST_CASE("youden threshold") {
  SUBCASE("a clean gap picks the lowest anomaly score") {
    const RocCurve c = roc_curve({{0.1, 0.2, 0.3, 0.7, 0.9}, {0, 0, 0, 1, 1}});
    CHECK(c.optimal_threshold == 0.7);
    CHECK(c.youden_j == 1.0);
    CHECK(optimal_threshold(c) == 0.7);
  }
  SUBCASE("no separation keeps the never-flag threshold") {
    const RocCurve c = roc_curve({{1, 1, 1, 1}, {0, 1, 0, 1}});
    CHECK(c.youden_j == 0.0);
    CHECK(c.optimal_threshold == std::numeric_limits<double>::infinity());
  }
  SUBCASE("matches a brute-force sweep over candidate thresholds") {
    Rng rng(12);
    for (int t = 0; t < 20; ++t) {
      const LabeledScores d = random_scores(rng, 50, t % 2 == 1);
      // Oracle: try every observed score (and +inf), keep the best J,
      // preferring the higher threshold on ties.
      Vector candidates = d.scores;
      candidates.push_back(std::numeric_limits<double>::infinity());
      double best_j = -2.0, best_t = 0.0;
      for (double th : candidates) {
        double tp = 0, fp = 0;
        for (std::size_t i = 0; i < d.scores.size(); ++i) {
          if (d.scores[i] < th) continue;
          (d.labels[i] ? tp : fp) += 1.0;
        }
        const double j = tp / d.positives() - fp / d.negatives();
        if (j > best_j + 1e-12 || (std::abs(j - best_j) <= 1e-12 && th > best_t)) {
          best_j = j;
          best_t = th;
        }
      }
      const RocCurve c = roc_curve(d);
      CHECK(c.youden_j == doctest::Approx(best_j).epsilon(1e-12));
      CHECK(c.optimal_threshold == best_t);
    }
  }
}

TEST_CASE("threshold metrics count the confusion matrix") {
  const LabeledScores d{{0.1, 0.4, 0.5, 0.6, 0.9}, {0, 1, 0, 1, 1}};
  const ThresholdMetrics m = threshold_metrics(d, 0.5);
  CHECK(m.tp == 2);
  CHECK(m.fp == 1);
  CHECK(m.tn == 1);
  CHECK(m.fn == 1);
  CHECK(m.accuracy == doctest::Approx(0.6));
  CHECK(m.precision == doctest::Approx(2.0 / 3.0));
  CHECK(m.recall == doctest::Approx(2.0 / 3.0));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
  const ThresholdMetrics none = threshold_metrics(d, 10.0);
  CHECK(none.tp == 0);
  CHECK(none.precision == 0.0);
  CHECK(none.f1 == 0.0);
}

TEST_CASE("knn baseline") {
  Rng rng(13);
  const Matrix train = testing::random_matrix(80, 3, rng);
  SUBCASE("a training row has zero distance at k = 1") {
    Matrix q(1, 3);
    std::copy(train.row_span(4).begin(), train.row_span(4).end(), q.row_span(0).begin());
    CHECK(knn_anomaly_scores(train, q, 1)[0] == 0.0);
  }
  SUBCASE("distance grows along a ray away from the data") {
    Matrix q(10, 3);
    for (std::size_t i = 0; i < 10; ++i) q(i, 0) = 2.0 + static_cast<double>(i);
    const Vector s = knn_anomaly_scores(train, q, 5);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
  }
  SUBCASE("matches the full-sort oracle and ignores training order") {
    const Matrix test = testing::random_matrix(30, 3, rng, 1.5);
    for (std::size_t k : {1u, 5u, 80u}) {
      const Vector got = knn_anomaly_scores(train, test, k);
      const Vector want = testing::naive_knn(train, test, k);
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
    Matrix reversed(train.rows(), train.cols());
    for (std::size_t r = 0; r < train.rows(); ++r) {
      std::copy(train.row_span(r).begin(), train.row_span(r).end(),
                reversed.row_span(train.rows() - 1 - r).begin());
    }
    CHECK(knn_anomaly_scores(reversed, test, 5) == knn_anomaly_scores(train, test, 5));
  }
  SUBCASE("bad k and width") {
    CHECK_THROWS_AS(knn_anomaly_scores(train, train, 0), std::invalid_argument);
    CHECK_THROWS_AS(knn_anomaly_scores(train, train, 81), std::invalid_argument);
    CHECK_THROWS_AS(knn_anomaly_scores(train, Matrix(2, 4), 1), std::invalid_argument);
  }
}
