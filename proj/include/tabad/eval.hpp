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
#include <span>
#include <vector>

#include "tabad/tensor.hpp"

namespace tabad {

/// Scores with binary labels (1 = anomaly). Larger scores are more anomalous.
struct LabeledScores {
  Vector scores;
  std::vector<int> labels;

  std::size_t positives() const;
  std::size_t negatives() const;
  /// Throws unless lengths match, labels are 0/1 and scores finite.
  void validate() const;
};

struct RocPoint {
  double threshold;  // a row is flagged when score >= threshold
  double tpr;
  double fpr;
};

/// Points run from threshold +inf at (0, 0) down through every distinct
/// score to the lowest score at (1, 1).
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  double optimal_threshold = 0.0;
  double youden_j = 0.0;
};

/// Throws if either class is missing.
RocCurve roc_curve(const LabeledScores& data);

/// Threshold maximising TPR - FPR; ties go to the higher threshold.
double optimal_threshold(const RocCurve& curve);

struct ThresholdMetrics {
  double threshold = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

ThresholdMetrics threshold_metrics(const LabeledScores& data, double threshold);

/// Distance from every test row to its k-th nearest training row (exact,
/// brute force, Euclidean).
Vector knn_anomaly_scores(const Matrix& train_normal, const Matrix& test, std::size_t k);

}  // namespace tabad
