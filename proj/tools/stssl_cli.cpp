/**
 * Copyright 2026 The stssl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// Command-line front end: synthetic data, training, evaluation, prediction
// export and augmentation inspection.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stssl/checkpoint.hpp"
#include "stssl/config.hpp"
#include "stssl/data.hpp"
#include "stssl/errors.hpp"
#include "stssl/evaluation.hpp"
#include "stssl/synthetic.hpp"
#include "stssl/text_io.hpp"
#include "stssl/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIngestion = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitInternal = 1;

stssl::Dataset open_dataset(const std::string& manifest_path) {
  stssl::DatasetManifest manifest;
  try {
    manifest = stssl::DatasetManifest::load(manifest_path);
  } catch (const stssl::ConfigError& e) {
    throw stssl::IngestionError(e.what());
  }
  return stssl::load_dataset(manifest);
}

std::vector<double> parse_minutes(const std::string& text) {
  std::vector<double> out;
  const auto cells = stssl::split_csv_line(text);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    try {
      out.push_back(stssl::parse_cell(cells[i], "--horizons", 1, i + 1));
    } catch (const stssl::IngestionError& e) {
      throw stssl::ConfigError(e.what());
    }
  }
  return out;
}

void ensure_parent_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw stssl::IngestionError("cannot create " + parent.string() + ": " + ec.message());
}

int run_gen_synthetic(const std::string& spec_path, const std::string& out_dir) {
  const stssl::SyntheticSpec spec = stssl::SyntheticSpec::load(spec_path);
  const stssl::SyntheticDataset data = stssl::generate_synthetic(spec);
  const std::string manifest = stssl::write_synthetic(data, spec, out_dir);
  std::cout << data.description << '\n' << "manifest: " << manifest << '\n';
  return kExitOk;
}

int run_train(const std::string& data_path, const std::string& config_path, const std::string& out_path,
              std::optional<std::uint64_t> seed) {
  stssl::TrainConfig config = stssl::TrainConfig::load(config_path);
  if (seed) config.seed = *seed;
  config.validate();
  const stssl::Dataset dataset = open_dataset(data_path);
  ensure_parent_dir(out_path);

  stssl::TrainOptions options;
  options.history_path = out_path + ".history.csv";
  options.on_epoch = [](const stssl::EpochRecord& r) {
    std::cout << "epoch " << r.epoch << "  loss " << r.loss << "  l_p " << r.l_p << "  l_s " << r.l_s << "  l_t "
              << r.l_t << "  val_mae " << r.val_mae << "  val_rmse " << r.val_rmse << std::endl;
  };
  const stssl::TrainResult result = stssl::train(dataset, config, options);
  for (const auto& w : result.splits.warnings) std::cerr << "warning: " << w << '\n';
  result.best.save(out_path);
  std::cout << "checkpoint (epoch " << result.best.epoch << "): " << out_path << '\n'
            << "history: " << options.history_path << '\n';
  return kExitOk;
}

int run_eval(const std::string& ckpt_path, const std::string& data_path, const std::string& horizons_text,
             const std::string& out_path) {
  const stssl::Checkpoint ckpt = stssl::Checkpoint::load(ckpt_path);
  const stssl::Dataset dataset = open_dataset(data_path);
  const auto minutes = parse_minutes(horizons_text);
  const auto steps = stssl::horizons_from_minutes(minutes, dataset.manifest.interval_minutes);
  stssl::check_horizons(steps, ckpt.config.max_horizon());
  const auto splits = stssl::split_and_window(dataset.series.n_steps, ckpt.config.split, ckpt.config.input_window,
                                              ckpt.config.max_horizon());
  const stssl::MetricsReport report = stssl::evaluate(ckpt, dataset, splits.test, steps);
  stssl::print_report_table(std::cout, report);
  if (!out_path.empty()) {
    ensure_parent_dir(out_path);
    stssl::write_report_csv(out_path, report);
  }
  return kExitOk;
}

int run_predict(const std::string& ckpt_path, const std::string& data_path, const std::string& out_path) {
  const stssl::Checkpoint ckpt = stssl::Checkpoint::load(ckpt_path);
  const stssl::Dataset dataset = open_dataset(data_path);
  const auto splits = stssl::split_and_window(dataset.series.n_steps, ckpt.config.split, ckpt.config.input_window,
                                              ckpt.config.max_horizon());
  const stssl::PredictionSet predictions =
      stssl::collect_predictions(ckpt, dataset, splits.test, ckpt.config.horizons);
  ensure_parent_dir(out_path);
  stssl::write_predictions_csv(out_path, predictions);
  std::cout << predictions.y_pred.size() << " predictions written to " << out_path << '\n';
  return kExitOk;
}

int run_inspect(const std::string& ckpt_path, const std::string& data_path, const std::string& out_dir) {
  const stssl::Checkpoint ckpt = stssl::Checkpoint::load(ckpt_path);
  const stssl::Dataset dataset = open_dataset(data_path);
  const stssl::AugmentationReport report = stssl::inspect_augmentation(ckpt, dataset);
  for (const auto& path : stssl::write_augmentation_report(report, out_dir)) std::cout << path << '\n';
  std::cout << report.graph.edges_removed.size() << " edges removed, " << report.graph.edges_added.size()
            << " added\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal self-supervised traffic forecasting"};
  app.require_subcommand(1);

  std::string spec_path, out_dir;
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic dataset");
  gen->add_option("--spec", spec_path, "Synthetic spec file")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();

  std::string data_path, config_path, out_path;
  std::optional<std::uint64_t> seed;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--data", data_path, "Dataset manifest")->required();
  train->add_option("--config", config_path, "Training config")->required();
  train->add_option("--out", out_path, "Checkpoint path")->required();
  train->add_option("--seed", seed, "Override the config seed");

  std::string ckpt_path, horizons;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  eval->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  eval->add_option("--data", data_path, "Dataset manifest")->required();
  eval->add_option("--horizons", horizons, "Horizons in minutes, e.g. 30,45,60")->required();
  eval->add_option("--out", out_path, "Optional report CSV");

  auto* predict = app.add_subcommand("predict", "Write test-split predictions as CSV");
  predict->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  predict->add_option("--data", data_path, "Dataset manifest")->required();
  predict->add_option("--out", out_path, "Output CSV")->required();

  auto* inspect = app.add_subcommand("inspect-augment", "Dump heterogeneity scores and augmentation edits");
  inspect->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  inspect->add_option("--data", data_path, "Dataset manifest")->required();
  inspect->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) return run_gen_synthetic(spec_path, out_dir);
    if (*train) return run_train(data_path, config_path, out_path, seed);
    if (*eval) return run_eval(ckpt_path, data_path, horizons, out_path);
    if (*predict) return run_predict(ckpt_path, data_path, out_path);
    if (*inspect) return run_inspect(ckpt_path, data_path, out_dir);
  } catch (const stssl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const stssl::IngestionError& e) {
    std::cerr << "ingestion error: " << e.what() << '\n';
    return kExitIngestion;
  } catch (const stssl::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
