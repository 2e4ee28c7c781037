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
#ifndef STSSL_TRAINER_HPP
#define STSSL_TRAINER_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "stssl/augmentation.hpp"
#include "stssl/checkpoint.hpp"
#include "stssl/config.hpp"
#include "stssl/data.hpp"

namespace stssl {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double l_p = 0.0;
  double l_s = 0.0;  // 0 when the spatial term is disabled
  double l_t = 0.0;  // 0 when the temporal term is disabled
  double val_mae = 0.0;
  double val_rmse = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> records;

  static const char* csv_header() { return "epoch,loss,l_p,l_s,l_t,val_mae,val_rmse"; }
  static std::string csv_row(const EpochRecord& record);
  void write_csv(const std::string& path) const;
};

struct TrainOptions {
  // When set, each epoch's row is appended as soon as it completes.
  std::string history_path;
  std::function<void(const EpochRecord&)> on_epoch;
  // Checked after each epoch; returning true ends training early.
  std::function<bool(const EpochRecord&)> should_stop;
};

struct TrainResult {
  Checkpoint best;   // lowest validation MAE (latest epoch when there is no validation split)
  Checkpoint last;   // state after the final epoch
  TrainHistory history;
  DatasetSplits splits;
};

/// Trains on the chronological training split. Per epoch the heterogeneity
/// scores are recomputed from a fixed scoring batch and the graph is
/// perturbed once; per batch the sequence is masked, both branches are
/// encoded and one Adam step is taken. All randomness derives from
/// (config.seed, epoch, batch), so equal seeds give bit-identical runs.
/// Throws NumericError naming the epoch and batch on a non-finite loss.
TrainResult train(const Dataset& dataset, const TrainConfig& config, const TrainOptions& options = {});

// Window indices used to score heterogeneity: up to batch_size evenly spaced training windows.
std::vector<std::size_t> scoring_indices(const WindowSet& windows, std::size_t batch_size);

struct AugmentationReport {
  HeterogeneityScores scores;
  Eigen::MatrixXd mask_probability;  // T × N
  Eigen::MatrixXd mask_rate;         // T × N, empirical over the scoring batch
  GraphPerturbation graph;
};

// Reproduces the augmentation the checkpoint's next epoch would draw.
AugmentationReport inspect_augmentation(const Checkpoint& checkpoint, const Dataset& dataset);

// Writes u.csv, eta.csv, mask_rates.csv, edges_removed.csv and edges_added.csv into `dir`.
std::vector<std::string> write_augmentation_report(const AugmentationReport& report, const std::string& dir);

}  // namespace stssl

#endif  // STSSL_TRAINER_HPP
