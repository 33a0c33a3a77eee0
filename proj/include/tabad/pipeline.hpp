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

// End-to-end workflow: load -> split -> preprocess -> train -> score ->
// evaluate, with every artifact written through a staging directory so a
// failed stage leaves no partial output behind.

#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabad/bundle.hpp"
#include "tabad/config.hpp"
#include "tabad/eval.hpp"
#include "tabad/inversion.hpp"
#include "tabad/table.hpp"

namespace tabad {

/// Artifact file names inside output.dir.
namespace artifact {
inline constexpr const char* kModel = "model.tabad";
inline constexpr const char* kScores = "scores.csv";
inline constexpr const char* kRoc = "roc.csv";
inline constexpr const char* kLoss = "loss.csv";
inline constexpr const char* kMetrics = "metrics.txt";
inline constexpr const char* kEncoded = "encoded_train.csv";
inline constexpr const char* kNormalizers = "normalizers.txt";
}  // namespace artifact

/// Carries the name of the stage that failed.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& message);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PreparedData {
  std::vector<std::string> feature_names;
  Table train;  // normal rows used for fitting; features and label
  Table test;   // held-out normal rows and every anomaly; features and label
  std::vector<std::size_t> train_ids;  // 0-based data row of each train row
  std::vector<std::size_t> test_ids;
  std::vector<int> test_labels;  // 1 = anomaly
  std::size_t input_rows = 0;
};

/// Loads data.path (or synthesises the benchmark), drops data.drop, and
/// splits: a seeded data.test_fraction share of the normal rows is held
/// out, every anomalous row goes to the test side. Rows keep input order.
PreparedData prepare_data(const RunConfig& config);

/// The synthetic benchmark as configured by synth.*.
Table synthetic_dataset(const RunConfig& config);

struct PipelineHooks {
  /// Sees exactly the rows used for preprocessing and training, label
  /// column included.
  std::function<void(const Table&)> on_training_rows;
  EpochCallback on_epoch;
};

RowCodec fit_preprocessor(const RunConfig& config, const PreparedData& data,
                          const PipelineHooks& hooks = {});
ModelBundle train_model(const RunConfig& config, const PreparedData& data,
                        const PipelineHooks& hooks = {});

/// Scores every row of `rows` (feature columns looked up by name). Row i
/// uses inversion seed derived from the run seed plus i.
std::vector<AnomalyReport> score_rows(const ModelBundle& bundle, const RunConfig& config,
                                      const Table& rows);

/// kNN baseline scores of `data.test`, in min-max space fitted on the
/// training rows.
Vector knn_baseline(const RunConfig& config, const PreparedData& data);

struct Evaluation {
  RocCurve roc;
  ThresholdMetrics metrics;  // at the Youden threshold
  double knn_auc = 0.0;
};

Evaluation evaluate_scores(const LabeledScores& anogan, const LabeledScores& knn);

/// scores.csv content: row_id, label, score, flagged, diff_<feature> (data
/// units) and sqerr_<feature> (encoded squared error).
Table scores_table(const PreparedData& data, const std::vector<AnomalyReport>& reports,
                   double threshold);
Table roc_table(const RocCurve& roc);
Table loss_table(const LossHistory& history);
std::string metrics_text(const Evaluation& eval, const PreparedData& data,
                         const ModelBundle& bundle, std::size_t knn_k);

// Command drivers. Each writes its artifacts into config.output_dir.
void run_preprocess(const RunConfig& config, const PipelineHooks& hooks = {});
void run_train(const RunConfig& config, const PipelineHooks& hooks = {});
void run_score(const RunConfig& config);
void run_evaluate(const RunConfig& config);
/// Every stage in order; writes all artifacts or none.
void run_pipeline(const RunConfig& config, const PipelineHooks& hooks = {});

}  // namespace tabad
