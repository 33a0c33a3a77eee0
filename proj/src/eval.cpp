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

#include "tabad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tabad {

std::size_t LabeledScores::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

std::size_t LabeledScores::negatives() const { return labels.size() - positives(); }

void LabeledScores::validate() const {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("labeled scores: " + std::to_string(scores.size()) + " scores but " +
                                std::to_string(labels.size()) + " labels");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("labels must be 0 or 1");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw NonFiniteError("labeled scores: non-finite score");
  }
}

RocCurve roc_curve(const LabeledScores& data) {
  data.validate();
  const std::size_t p = data.positives();
  const std::size_t n = data.negatives();
  if (p == 0 || n == 0) {
    throw std::invalid_argument("roc_curve: both classes must be present (" + std::to_string(p) +
                                " anomalies, " + std::to_string(n) + " normal)");
  }

  std::vector<std::size_t> order(data.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data.scores[a] > data.scores[b]; });

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  // Trapezoid area in integer units of (1/n) x (1/p), doubled to stay integral.
  std::uint64_t tp = 0, fp = 0, area2 = 0;
  // J is compared as tp*n - fp*p to avoid floating ties.
  std::int64_t best_j = 0;
  curve.optimal_threshold = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < order.size();) {
    const double s = data.scores[order[i]];
    const std::uint64_t tp_prev = tp, fp_prev = fp;
    for (; i < order.size() && data.scores[order[i]] == s; ++i) {
      (data.labels[order[i]] == 1 ? tp : fp) += 1;
    }
    area2 += (fp - fp_prev) * (tp + tp_prev);
    curve.points.push_back({s, static_cast<double>(tp) / static_cast<double>(p),
                            static_cast<double>(fp) / static_cast<double>(n)});
    const std::int64_t j = static_cast<std::int64_t>(tp * n) - static_cast<std::int64_t>(fp * p);
    if (j > best_j) {
      best_j = j;
      curve.optimal_threshold = s;
    }
  }
  curve.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(p) * static_cast<double>(n));
  curve.youden_j = static_cast<double>(best_j) / (static_cast<double>(p) * static_cast<double>(n));
  return curve;
}

double optimal_threshold(const RocCurve& curve) {
  if (curve.points.empty()) throw std::invalid_argument("optimal_threshold: empty curve");
  // Points are ordered by decreasing threshold, so the first maximum is the
  // highest threshold among ties.
  double best = -std::numeric_limits<double>::infinity();
  double threshold = curve.points.front().threshold;
  for (const RocPoint& pt : curve.points) {
    const double j = pt.tpr - pt.fpr;
    if (j > best) {
      best = j;
      threshold = pt.threshold;
    }
  }
  return threshold;
}

ThresholdMetrics threshold_metrics(const LabeledScores& data, double threshold) {
  data.validate();
  ThresholdMetrics m;
  m.threshold = threshold;
  for (std::size_t i = 0; i < data.scores.size(); ++i) {
    const bool flagged = data.scores[i] >= threshold;
    if (data.labels[i] == 1) {
      (flagged ? m.tp : m.fn) += 1;
    } else {
      (flagged ? m.fp : m.tn) += 1;
    }
  }
  const auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  m.accuracy = ratio(m.tp + m.tn, data.scores.size());
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

Vector knn_anomaly_scores(const Matrix& train, const Matrix& test, std::size_t k) {
  if (k == 0 || k > train.rows()) {
    throw std::invalid_argument("knn: k = " + std::to_string(k) + " with " +
                                std::to_string(train.rows()) + " training rows");
  }
  if (train.cols() != test.cols()) {
    throw std::invalid_argument("knn: training width " + std::to_string(train.cols()) +
                                " differs from test width " + std::to_string(test.cols()));
  }
  Vector scores(test.rows());
  std::vector<double> dist(train.rows());
  for (std::size_t q = 0; q < test.rows(); ++q) {
    const auto x = test.row_span(q);
    for (std::size_t r = 0; r < train.rows(); ++r) {
      const auto t = train.row_span(r);
      double acc = 0.0;
      for (std::size_t c = 0; c < x.size(); ++c) acc += (x[c] - t[c]) * (x[c] - t[c]);
      dist[r] = acc;
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    scores[q] = std::sqrt(dist[k - 1]);
  }
  return scores;
}

}  // namespace tabad
