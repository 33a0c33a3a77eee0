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

// Command-line front end. Exit codes: 0 success, 1 usage error (bad flags,
// unknown subcommand, invalid configuration), 2 runtime error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "tabad/bundle.hpp"
#include "tabad/config.hpp"
#include "tabad/csv.hpp"
#include "tabad/log.hpp"
#include "tabad/pipeline.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

std::string config_keys_help() {
  std::string s = "Configuration keys (flat 'key = value' file; every key optional):\n";
  for (const auto& k : tabad::config_reference()) {
    s += "  " + k.key + " = " + (k.default_value.empty() ? "(empty)" : k.default_value) + "\n      " +
         k.help + "\n";
  }
  s += "\nExit codes: 0 success, 1 usage error, 2 runtime error.\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tabad: GAN-based anomaly detection for tabular data"};
  app.footer(config_keys_help());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_arg = "demo";
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  app.add_option("--config", config_arg,
                 "configuration file, or 'demo' for the built-in synthetic benchmark")
      ->capture_default_str();
  app.add_option("--seed", seed, "override the configured seed");
  app.add_flag("-v,--verbose", verbose, "print progress to stderr");

  auto* preprocess = app.add_subcommand(
      "preprocess", "fit column normalizers on the training rows; writes encoded_train.csv and normalizers.txt");
  auto* train = app.add_subcommand("train", "preprocess and train the GAN; writes model.tabad and loss.csv");
  auto* score = app.add_subcommand("score", "score the held-out rows with model.tabad; writes scores.csv");
  auto* evaluate =
      app.add_subcommand("evaluate", "ROC, threshold and kNN baseline from scores.csv; writes roc.csv and metrics.txt");
  auto* run = app.add_subcommand("run", "every stage in order; writes all artifacts or none");

  std::string synth_out;
  auto* synth = app.add_subcommand("synth-data", "write the synthetic benchmark (synth.* keys) as CSV");
  synth->add_option("path", synth_out, "output CSV (default: <output.dir>/synthetic.csv)");

  auto* model = app.add_subcommand("model", "model bundle utilities");
  model->require_subcommand(1);
  std::string inspect_path;
  auto* inspect = model->add_subcommand("inspect", "print a summary of a model bundle");
  inspect->add_option("path", inspect_path, "bundle path (default: <output.dir>/model.tabad)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsageError;
  }

  tabad::RunConfig config;
  try {
    config = tabad::load_config(config_arg);
    if (seed) config.seed = *seed;
    config.validate();
  } catch (const tabad::ConfigError& e) {
    std::cerr << "tabad: configuration error: " << e.what() << "\n";
    return kUsageError;
  }
  tabad::log::set_verbose(verbose);

  tabad::PipelineHooks hooks;
  if (verbose) {
    hooks.on_epoch = [](std::size_t epoch, double g, double d) {
      if (epoch % 10 == 0 || epoch == 1) {
        std::clog << "epoch " << epoch << "  G " << tabad::format_double(g) << "  D "
                  << tabad::format_double(d) << "\n";
      }
    };
  }

  try {
    if (*preprocess) {
      tabad::run_preprocess(config, hooks);
    } else if (*train) {
      tabad::run_train(config, hooks);
    } else if (*score) {
      tabad::run_score(config);
    } else if (*evaluate) {
      tabad::run_evaluate(config);
    } else if (*run) {
      tabad::run_pipeline(config, hooks);
      std::cout << "artifacts written to " << config.output_dir << "\n";
    } else if (*synth) {
      std::string path = synth_out;
      if (path.empty()) {
        std::filesystem::create_directories(config.output_dir);
        path = (std::filesystem::path(config.output_dir) / "synthetic.csv").string();
      }
      tabad::write_csv(path, tabad::synthetic_dataset(config));
      std::cout << "wrote " << path << "\n";
    } else if (*inspect) {
      const std::string path = inspect_path.empty()
                                   ? (std::filesystem::path(config.output_dir) / tabad::artifact::kModel).string()
                                   : inspect_path;
      std::cout << tabad::describe_bundle(tabad::load_model(path));
    }
  } catch (const tabad::ConfigError& e) {
    std::cerr << "tabad: configuration error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "tabad: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
