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

#include "tabad/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>

#include "tabad/csv.hpp"
#include "tabad/log.hpp"
#include "tabad/minmax.hpp"
#include "tabad/rng.hpp"
#include "tabad/synth.hpp"

namespace tabad {

namespace fs = std::filesystem;

namespace {

// Independent random streams derived from the run seed.
enum Stream : std::uint64_t { kSplitStream = 1, kGmmStream = 2, kTrainStream = 3, kInversionStream = 4 };

template <class F>
auto in_stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const PipelineError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

// Artifacts are written here first and moved into the output directory only
// when every stage has succeeded.
class Staging {
 public:
  explicit Staging(const std::string& output_dir) : out_(output_dir), dir_(out_ / ".staging") {
    fs::create_directories(out_);
    fs::remove_all(dir_);
    fs::create_directory(dir_);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  std::string path(const char* name) const { return (dir_ / name).string(); }

  void commit() {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir_)) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) fs::rename(f, out_ / f.filename());
  }

 private:
  fs::path out_;
  fs::path dir_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

std::string artifact_path(const RunConfig& config, const char* name) {
  return (fs::path(config.output_dir) / name).string();
}

Table feature_table(const Table& t, const std::vector<std::string>& names) { return t.select_columns(names); }

InversionConfig inversion_config(const RunConfig& config) {
  InversionConfig inv = config.inversion;
  inv.seed = derive_seed(config.seed, kInversionStream);
  return inv;
}

LabeledScores labeled(const PreparedData& data, Vector scores) {
  return LabeledScores{std::move(scores), data.test_labels};
}

}  // namespace

PipelineError::PipelineError(std::string stage, const std::string& message)
    : std::runtime_error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}

Table synthetic_dataset(const RunConfig& config) { return make_synthetic(config.synth); }

PreparedData prepare_data(const RunConfig& config) {
  const DataConfig& dc = config.data;
  Table table;
  if (dc.path.empty()) {
    if (dc.label_column != kSynthLabelColumn || dc.anomaly_value != kSynthAnomalyLabel) {
      throw ConfigError(std::string("the synthetic benchmark uses data.label_column = ") +
                        kSynthLabelColumn + " and data.anomaly_value = 1");
    }
    table = drop_columns(synthetic_dataset(config), dc.drop);
  } else {
    CsvReadOptions opts;
    opts.skip = dc.drop;
    opts.required = {dc.label_column};
    table = read_csv(dc.path, opts);
  }

  PreparedData data;
  data.input_rows = table.rows();
  for (const auto& name : table.names) {
    if (name != dc.label_column) data.feature_names.push_back(name);
  }
  if (data.feature_names.empty()) throw std::invalid_argument("dataset has no feature columns");

  const LabelSplit split = split_by_label(table, dc.label_column, dc.anomaly_value);
  const std::size_t n_normal = split.normal_rows.size();
  if (n_normal < 2) {
    throw std::invalid_argument("dataset has " + std::to_string(n_normal) +
                                " normal rows; at least 2 are needed to train and evaluate");
  }
  const auto n_test = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(dc.test_fraction * static_cast<double>(n_normal))), 1,
      n_normal - 1);

  std::vector<std::size_t> order = split.normal_rows;
  Rng rng(derive_seed(config.seed, kSplitStream));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::size_t> held(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  data.train_ids.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(data.train_ids.begin(), data.train_ids.end());

  data.test_ids = held;
  data.test_ids.insert(data.test_ids.end(), split.anomalous_rows.begin(), split.anomalous_rows.end());
  std::sort(data.test_ids.begin(), data.test_ids.end());

  data.train = table.select_rows(data.train_ids);
  data.test = table.select_rows(data.test_ids);
  const Vector& labels = data.test.column(dc.label_column);
  for (double v : labels) data.test_labels.push_back(v == dc.anomaly_value ? 1 : 0);
  return data;
}

RowCodec fit_preprocessor(const RunConfig& config, const PreparedData& data, const PipelineHooks& hooks) {
  if (hooks.on_training_rows) hooks.on_training_rows(data.train);
  PreprocessOptions opts = config.preprocess;
  opts.gmm.seed = derive_seed(config.seed, kGmmStream);
  return fit_codec(feature_table(data.train, data.feature_names), opts);
}

ModelBundle train_model(const RunConfig& config, const PreparedData& data, const PipelineHooks& hooks) {
  ModelBundle bundle;
  bundle.codec = in_stage("preprocess", [&] { return fit_preprocessor(config, data, hooks); });
  in_stage("train", [&] {
    const Matrix encoded = bundle.codec.encode(data.train);
    TrainConfig tc = config.train;
    tc.seed = derive_seed(config.seed, kTrainStream);
    TrainResult result = train_gan(encoded, bundle.codec.layout(), tc, hooks.on_epoch);
    bundle.model = std::move(result.model);
    bundle.history = std::move(result.history);
    bundle.config_text = to_text(config);
    return 0;
  });
  return bundle;
}

std::vector<AnomalyReport> score_rows(const ModelBundle& bundle, const RunConfig& config, const Table& rows) {
  if (rows.rows() == 0) return {};
  const Matrix encoded = bundle.codec.encode(rows);
  const Matrix raw = rows.select_columns(bundle.codec.feature_names()).to_matrix();
  return score_batch(encoded, bundle.model, bundle.codec, inversion_config(config), &raw);
}

Vector knn_baseline(const RunConfig& config, const PreparedData& data) {
  const std::size_t n_features = data.feature_names.size();
  Matrix train(data.train.rows(), n_features);
  Matrix test(data.test.rows(), n_features);
  for (std::size_t j = 0; j < n_features; ++j) {
    const Vector& tr = data.train.column(data.feature_names[j]);
    const Vector& te = data.test.column(data.feature_names[j]);
    const MinMaxParams mm = fit_minmax(tr, data.feature_names[j]);
    for (std::size_t i = 0; i < tr.size(); ++i) train(i, j) = mm.transform(tr[i]);
    for (std::size_t i = 0; i < te.size(); ++i) test(i, j) = mm.transform(te[i]);
  }
  return knn_anomaly_scores(train, test, config.eval.knn_k);
}

Evaluation evaluate_scores(const LabeledScores& anogan, const LabeledScores& knn) {
  Evaluation e;
  e.roc = roc_curve(anogan);
  e.metrics = threshold_metrics(anogan, e.roc.optimal_threshold);
  e.knn_auc = roc_curve(knn).auc;
  return e;
}

Table scores_table(const PreparedData& data, const std::vector<AnomalyReport>& reports, double threshold) {
  if (reports.size() != data.test_ids.size()) {
    throw std::invalid_argument("scores_table: report count does not match the test rows");
  }
  Table t;
  const std::size_t n = reports.size();
  Vector ids(n), labels(n), scores(n), flagged(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = static_cast<double>(data.test_ids[i]);
    labels[i] = data.test_labels[i];
    scores[i] = reports[i].score;
    flagged[i] = reports[i].score >= threshold ? 1.0 : 0.0;
  }
  t.add_column("row_id", std::move(ids));
  t.add_column("label", std::move(labels));
  t.add_column("score", std::move(scores));
  t.add_column("flagged", std::move(flagged));
  const std::size_t f = data.feature_names.size();
  for (std::size_t j = 0; j < f; ++j) {
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = reports[i].feature_abs_diff.at(j);
    t.add_column("diff_" + data.feature_names[j], std::move(v));
  }
  for (std::size_t j = 0; j < f; ++j) {
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = reports[i].feature_sq_error.at(j);
    t.add_column("sqerr_" + data.feature_names[j], std::move(v));
  }
  return t;
}

Table roc_table(const RocCurve& roc) {
  Vector thr, tpr, fpr;
  for (const RocPoint& p : roc.points) {
    thr.push_back(p.threshold);
    tpr.push_back(p.tpr);
    fpr.push_back(p.fpr);
  }
  Table t;
  t.add_column("threshold", std::move(thr));
  t.add_column("tpr", std::move(tpr));
  t.add_column("fpr", std::move(fpr));
  return t;
}

Table loss_table(const LossHistory& h) {
  Vector epoch(h.generator.size());
  std::iota(epoch.begin(), epoch.end(), 1.0);
  Table t;
  t.add_column("epoch", std::move(epoch));
  t.add_column("generator", h.generator);
  t.add_column("discriminator", h.discriminator);
  t.add_column("smoothed_generator", h.smoothed_generator);
  return t;
}

std::string metrics_text(const Evaluation& e, const PreparedData& data, const ModelBundle& bundle,
                         std::size_t knn_k) {
  const ThresholdMetrics& m = e.metrics;
  std::string s;
  auto put = [&](const char* key, const std::string& value) { s += std::string(key) + " = " + value + "\n"; };
  put("auc", format_double(e.roc.auc));
  put("knn_auc", format_double(e.knn_auc));
  put("knn_k", std::to_string(knn_k));
  put("threshold", format_double(m.threshold));
  put("youden_j", format_double(e.roc.youden_j));
  put("accuracy", format_double(m.accuracy));
  put("precision", format_double(m.precision));
  put("recall", format_double(m.recall));
  put("f1", format_double(m.f1));
  put("tp", std::to_string(m.tp));
  put("fp", std::to_string(m.fp));
  put("tn", std::to_string(m.tn));
  put("fn", std::to_string(m.fn));
  put("train_rows", std::to_string(data.train.rows()));
  put("test_rows", std::to_string(data.test.rows()));
  put("test_anomalies", std::to_string(std::count(data.test_labels.begin(), data.test_labels.end(), 1)));
  put("encoded_width", std::to_string(bundle.codec.width()));
  put("stop_epoch", std::to_string(bundle.history.stop_epoch));
  put("best_epoch", std::to_string(bundle.history.best_epoch));
  return s;
}

void run_preprocess(const RunConfig& config, const PipelineHooks& hooks) {
  config.validate();
  const PreparedData data = in_stage("load", [&] { return prepare_data(config); });
  const RowCodec codec = in_stage("preprocess", [&] { return fit_preprocessor(config, data, hooks); });
  in_stage("report", [&] {
    Staging staging(config.output_dir);
    const Matrix encoded = codec.encode(data.train);
    Table t;
    std::size_t slot = 0;
    for (std::size_t c = 0; c < codec.columns().size(); ++c) {
      const ColumnNormalizer& col = codec.columns()[c];
      for (std::size_t j = 0; j < col.width(); ++j, ++slot) {
        Vector v(encoded.rows());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = encoded(i, slot);
        t.add_column(col.name + (j == 0 ? ".scalar" : ".mode" + std::to_string(j - 1)), std::move(v));
      }
    }
    write_csv(staging.path(artifact::kEncoded), t);
    write_text(staging.path(artifact::kNormalizers), describe_codec(codec));
    staging.commit();
    return 0;
  });
}

void run_train(const RunConfig& config, const PipelineHooks& hooks) {
  config.validate();
  const PreparedData data = in_stage("load", [&] { return prepare_data(config); });
  const ModelBundle bundle = train_model(config, data, hooks);
  in_stage("report", [&] {
    Staging staging(config.output_dir);
    save_model(bundle, staging.path(artifact::kModel));
    write_csv(staging.path(artifact::kLoss), loss_table(bundle.history));
    write_text(staging.path(artifact::kNormalizers), describe_codec(bundle.codec));
    staging.commit();
    return 0;
  });
}

void run_score(const RunConfig& config) {
  config.validate();
  const PreparedData data = in_stage("load", [&] { return prepare_data(config); });
  const ModelBundle bundle = in_stage("load", [&] { return load_model(artifact_path(config, artifact::kModel)); });
  const auto reports = in_stage("score", [&] { return score_rows(bundle, config, data.test); });
  in_stage("report", [&] {
    Vector scores;
    for (const auto& r : reports) scores.push_back(r.score);
    const RocCurve roc = roc_curve(labeled(data, scores));
    Staging staging(config.output_dir);
    write_csv(staging.path(artifact::kScores), scores_table(data, reports, roc.optimal_threshold));
    staging.commit();
    return 0;
  });
}

void run_evaluate(const RunConfig& config) {
  config.validate();
  const PreparedData data = in_stage("load", [&] { return prepare_data(config); });
  const ModelBundle bundle = in_stage("load", [&] { return load_model(artifact_path(config, artifact::kModel)); });
  in_stage("evaluate", [&] {
    CsvReadOptions opts;
    opts.required = {"row_id", "score"};
    const Table scores = read_csv(artifact_path(config, artifact::kScores), opts);
    const Vector& ids = scores.column("row_id");
    bool match = ids.size() == data.test_ids.size();
    for (std::size_t i = 0; match && i < ids.size(); ++i) match = ids[i] == static_cast<double>(data.test_ids[i]);
    if (!match) throw std::runtime_error("scores.csv rows do not match the configured test split");
    const Evaluation e =
        evaluate_scores(labeled(data, scores.column("score")), labeled(data, knn_baseline(config, data)));
    Staging staging(config.output_dir);
    write_csv(staging.path(artifact::kRoc), roc_table(e.roc));
    write_text(staging.path(artifact::kMetrics), metrics_text(e, data, bundle, config.eval.knn_k));
    staging.commit();
    return 0;
  });
}

void run_pipeline(const RunConfig& config, const PipelineHooks& hooks) {
  config.validate();
  const PreparedData data = in_stage("load", [&] { return prepare_data(config); });
  std::unique_ptr<Staging> staging =
      in_stage("prepare output", [&] { return std::make_unique<Staging>(config.output_dir); });

  const ModelBundle bundle = train_model(config, data, hooks);
  log::info("training stopped after " + std::to_string(bundle.history.stop_epoch) + " epochs");
  const auto reports = in_stage("score", [&] { return score_rows(bundle, config, data.test); });
  const Evaluation eval = in_stage("evaluate", [&] {
    Vector scores;
    for (const auto& r : reports) scores.push_back(r.score);
    return evaluate_scores(labeled(data, std::move(scores)), labeled(data, knn_baseline(config, data)));
  });
  in_stage("report", [&] {
    save_model(bundle, staging->path(artifact::kModel));
    write_csv(staging->path(artifact::kLoss), loss_table(bundle.history));
    write_text(staging->path(artifact::kNormalizers), describe_codec(bundle.codec));
    write_csv(staging->path(artifact::kScores), scores_table(data, reports, eval.roc.optimal_threshold));
    write_csv(staging->path(artifact::kRoc), roc_table(eval.roc));
    write_text(staging->path(artifact::kMetrics), metrics_text(eval, data, bundle, config.eval.knn_k));
    staging->commit();
    return 0;
  });
}

}  // namespace tabad
