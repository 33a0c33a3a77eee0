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

#include "tabad/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "tabad/csv.hpp"

namespace tabad {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

[[noreturn]] void bad_value(std::string_view v, const char* what) {
  throw ConfigError("'" + std::string(v) + "' is not " + what);
}

std::uint64_t to_u64(std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) bad_value(v, "a non-negative integer");
  return out;
}

std::size_t to_size(std::string_view v) { return static_cast<std::size_t>(to_u64(v)); }

double to_double(std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(v, "a finite number");
  }
  return out;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(v, "true or false");
}

std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    const auto item = trim(v.substr(start, comma == std::string_view::npos ? v.npos : comma - start));
    if (item.empty()) bad_value(v, "a comma-separated list without empty items");
    out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::size_t> to_size_list(std::string_view v) {
  std::vector<std::size_t> out;
  for (const auto& item : to_list(v)) out.push_back(to_size(item));
  return out;
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_same_v<T, std::string>) {
      s += items[i];
    } else {
      s += std::to_string(items[i]);
    }
  }
  return s;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

struct Field {
  const char* key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
  const char* help;
};

#define TABAD_SIZE(KEY, MEMBER, HELP)                                                   \
  Field {                                                                               \
    KEY, [](RunConfig& c, std::string_view v) { c.MEMBER = to_size(v); },               \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }, HELP               \
  }
#define TABAD_DOUBLE(KEY, MEMBER, HELP)                                                 \
  Field {                                                                               \
    KEY, [](RunConfig& c, std::string_view v) { c.MEMBER = to_double(v); },             \
        [](const RunConfig& c) { return format_double(c.MEMBER); }, HELP                \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"seed", [](RunConfig& c, std::string_view v) { c.seed = to_u64(v); },
            [](const RunConfig& c) { return std::to_string(c.seed); },
            "global seed; every random stream is derived from it"},
      Field{"output.dir", [](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); },
            [](const RunConfig& c) { return c.output_dir; }, "directory for all artifacts"},

      Field{"data.path", [](RunConfig& c, std::string_view v) { c.data.path = std::string(v); },
            [](const RunConfig& c) { return c.data.path; },
            "input CSV; empty uses the built-in synthetic benchmark"},
      Field{"data.label_column",
            [](RunConfig& c, std::string_view v) { c.data.label_column = std::string(v); },
            [](const RunConfig& c) { return c.data.label_column; }, "label column name"},
      TABAD_DOUBLE("data.anomaly_value", data.anomaly_value, "label value that marks an anomaly"),
      Field{"data.drop", [](RunConfig& c, std::string_view v) { c.data.drop = to_list(v); },
            [](const RunConfig& c) { return join(c.data.drop); },
            "comma-separated columns to ignore"},
      TABAD_DOUBLE("data.test_fraction", data.test_fraction,
                   "share of normal rows held out for evaluation"),

      TABAD_SIZE("synth.normal_rows", synth.normal_rows, "synthetic normal rows"),
      TABAD_SIZE("synth.anomaly_rows", synth.anomaly_rows, "synthetic planted anomalies"),
      TABAD_SIZE("synth.features", synth.features, "synthetic feature columns"),
      TABAD_DOUBLE("synth.min_shift", synth.min_shift_sigmas, "smallest anomaly shift in tight-mode sds"),
      TABAD_DOUBLE("synth.max_shift", synth.max_shift_sigmas, "largest anomaly shift in tight-mode sds"),
      Field{"synth.seed", [](RunConfig& c, std::string_view v) { c.synth.seed = to_u64(v); },
            [](const RunConfig& c) { return std::to_string(c.synth.seed); },
            "seed of the synthetic dataset (independent of the model seed)"},

      Field{"preprocess.encoding",
            [](RunConfig& c, std::string_view v) {
              try {
                c.preprocess.encoding = parse_column_encoding(v);
              } catch (const std::invalid_argument&) {
                bad_value(v, "gmm or minmax");
              }
            },
            [](const RunConfig& c) { return std::string(to_string(c.preprocess.encoding)); },
            "column encoding: gmm (mode-specific) or minmax"},
      Field{"preprocess.selection",
            [](RunConfig& c, std::string_view v) {
              try {
                c.preprocess.selection = parse_component_selection(v);
              } catch (const std::invalid_argument&) {
                bad_value(v, "bic or fixed");
              }
            },
            [](const RunConfig& c) { return std::string(to_string(c.preprocess.selection)); },
            "mixture size: bic (search 1..components) or fixed"},
      TABAD_SIZE("preprocess.components", preprocess.gmm.components, "maximum mixture components M"),
      TABAD_DOUBLE("preprocess.tol", preprocess.gmm.tol, "EM log-likelihood tolerance"),
      TABAD_SIZE("preprocess.max_iter", preprocess.gmm.max_iter, "EM iteration cap"),
      TABAD_DOUBLE("preprocess.weight_floor", preprocess.gmm.weight_floor,
                   "components lighter than this are pruned"),
      Field{"preprocess.scale_before_gmm",
            [](RunConfig& c, std::string_view v) { c.preprocess.scale_before_gmm = to_bool(v); },
            [](const RunConfig& c) { return bool_text(c.preprocess.scale_before_gmm); },
            "fit the mixture on min-max scaled values"},

      TABAD_DOUBLE("gumbel.temperature", train.gumbel.temperature, "softmax temperature"),
      Field{"gumbel.variant",
            [](RunConfig& c, std::string_view v) {
              try {
                c.train.gumbel.variant = parse_gumbel_variant(v);
              } catch (const std::invalid_argument&) {
                bad_value(v, "hard or soft");
              }
            },
            [](const RunConfig& c) { return std::string(to_string(c.train.gumbel.variant)); },
            "training head: hard (no noise) or soft (noised); inference is always hard"},

      TABAD_SIZE("train.epochs", train.epochs, "maximum epochs"),
      TABAD_SIZE("train.batch_size", train.batch_size, "rows per batch"),
      TABAD_SIZE("train.latent_dim", train.shape.latent_dim, "latent dimension"),
      Field{"train.generator_hidden",
            [](RunConfig& c, std::string_view v) { c.train.shape.generator_hidden = to_size_list(v); },
            [](const RunConfig& c) { return join(c.train.shape.generator_hidden); },
            "generator hidden widths"},
      Field{"train.discriminator_hidden",
            [](RunConfig& c, std::string_view v) {
              c.train.shape.discriminator_hidden = to_size_list(v);
            },
            [](const RunConfig& c) { return join(c.train.shape.discriminator_hidden); },
            "discriminator hidden widths"},
      TABAD_SIZE("train.pack", train.shape.discriminator_pack,
                 "rows the discriminator judges together"),
      TABAD_DOUBLE("train.g_lr", train.generator_optimizer.learning_rate, "generator Adam learning rate"),
      TABAD_DOUBLE("train.g_beta1", train.generator_optimizer.beta1, "generator Adam beta1"),
      TABAD_DOUBLE("train.g_beta2", train.generator_optimizer.beta2, "generator Adam beta2"),
      TABAD_DOUBLE("train.d_lr", train.discriminator_optimizer.learning_rate, "discriminator Adam learning rate"),
      TABAD_DOUBLE("train.d_beta1", train.discriminator_optimizer.beta1, "discriminator Adam beta1"),
      TABAD_DOUBLE("train.d_beta2", train.discriminator_optimizer.beta2, "discriminator Adam beta2"),
      TABAD_DOUBLE("train.eps", train.generator_optimizer.epsilon, "Adam epsilon (both networks)"),
      TABAD_SIZE("train.patience", train.patience, "epochs without improvement before stopping"),
      TABAD_SIZE("train.smoothing_window", train.smoothing_window,
                 "moving-average window of the generator loss"),

      TABAD_SIZE("inversion.steps", inversion.steps, "Adam steps per restart"),
      TABAD_SIZE("inversion.restarts", inversion.restarts, "independent starting points per row"),
      TABAD_DOUBLE("inversion.lr", inversion.optimizer.learning_rate, "inversion Adam learning rate"),
      TABAD_DOUBLE("inversion.beta1", inversion.optimizer.beta1, "inversion Adam beta1"),
      TABAD_DOUBLE("inversion.beta2", inversion.optimizer.beta2, "inversion Adam beta2"),
      TABAD_DOUBLE("inversion.eps", inversion.optimizer.epsilon, "inversion Adam epsilon"),
      TABAD_DOUBLE("inversion.tolerance", inversion.tolerance, "convergence tolerance on the loss"),
      TABAD_SIZE("inversion.stall_window", inversion.stall_window,
                 "steps over which an improvement below tolerance ends a restart"),
      TABAD_SIZE("inversion.threads", inversion.threads, "scoring threads; 0 uses every core"),

      TABAD_SIZE("eval.knn_k", eval.knn_k, "k of the kNN baseline"),
  };
  return table;
}

#undef TABAD_SIZE
#undef TABAD_DOUBLE

}  // namespace

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      try {
        f.set(config, trim(value));
      } catch (const ConfigError& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
      }
      // The discriminator shares the generator's epsilon.
      config.train.discriminator_optimizer.epsilon = config.train.generator_optimizer.epsilon;
      return;
    }
  }
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, std::string_view source) {
  RunConfig config;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.empty() || line.front() == '#') continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError(where + "key '" + std::string(key) + "' set twice");
    }
    try {
      apply_setting(config, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::string& path_or_preset) {
  if (path_or_preset.empty() || path_or_preset == "demo") return RunConfig{};
  std::ifstream in(path_or_preset, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path_or_preset + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path_or_preset);
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

std::vector<ConfigKey> config_reference() {
  const RunConfig defaults;
  std::vector<ConfigKey> out;
  for (const Field& f : fields()) out.push_back({f.key, f.get(defaults), f.help});
  return out;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(!data.label_column.empty(), "data.label_column must not be empty");
  require(std::find(data.drop.begin(), data.drop.end(), data.label_column) == data.drop.end(),
          "data.drop must not contain the label column");
  require(data.test_fraction > 0.0 && data.test_fraction < 1.0, "data.test_fraction must lie in (0, 1)");
  if (data.path.empty()) {
    require(synth.normal_rows >= 2 && synth.features >= 1, "synth needs at least 2 rows and 1 feature");
    require(synth.min_shift_sigmas > 0.0 && synth.max_shift_sigmas >= synth.min_shift_sigmas,
            "synth shifts must satisfy 0 < min_shift <= max_shift");
  }
  require(preprocess.gmm.components >= 1, "preprocess.components must be at least 1");
  require(preprocess.gmm.max_iter >= 1, "preprocess.max_iter must be at least 1");
  require(preprocess.gmm.tol >= 0.0, "preprocess.tol must be non-negative");
  require(preprocess.gmm.weight_floor >= 0.0 && preprocess.gmm.weight_floor < 1.0,
          "preprocess.weight_floor must lie in [0, 1)");
  require(train.gumbel.temperature > 0.0, "gumbel.temperature must be positive");
  require(train.epochs >= 1 && train.batch_size >= 1 && train.patience >= 1 && train.smoothing_window >= 1,
          "train.epochs, batch_size, patience and smoothing_window must be at least 1");
  require(train.shape.latent_dim >= 1, "train.latent_dim must be at least 1");
  require(train.shape.discriminator_pack >= 1 && train.batch_size >= train.shape.discriminator_pack,
          "train.pack must be at least 1 and at most train.batch_size");
  for (auto w : train.shape.generator_hidden) require(w >= 1, "hidden widths must be at least 1");
  for (auto w : train.shape.discriminator_hidden) require(w >= 1, "hidden widths must be at least 1");
  for (const AdamConfig* a : {&train.generator_optimizer, &train.discriminator_optimizer, &inversion.optimizer}) {
    require(a->learning_rate > 0.0 && a->beta1 >= 0.0 && a->beta1 < 1.0 && a->beta2 >= 0.0 && a->beta2 < 1.0 &&
                a->epsilon > 0.0,
            "Adam settings need lr > 0, beta1 and beta2 in [0, 1) and eps > 0");
  }
  require(inversion.steps >= 1 && inversion.restarts >= 1, "inversion.steps and restarts must be at least 1");
  require(inversion.tolerance >= 0.0, "inversion.tolerance must be non-negative");
  require(inversion.stall_window >= 1, "inversion.stall_window must be at least 1");
  require(eval.knn_k >= 1, "eval.knn_k must be at least 1");
}

}  // namespace tabad
