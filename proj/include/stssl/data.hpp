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
#ifndef STSSL_DATA_HPP
#define STSSL_DATA_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stssl/graph.hpp"
#include "stssl/tensor.hpp"

namespace stssl {

/// Raw speed matrix, step-major: values[t * n_nodes + n].
struct SpeedSeries {
  std::size_t n_steps = 0;
  std::size_t n_nodes = 0;
  std::vector<double> values;

  double at(std::size_t step, std::size_t node) const { return values[step * n_nodes + node]; }
};

/// z-score statistics fitted on the training split only.
struct Normalizer {
  double mean = 0.0;
  double std = 1.0;
  // Set when the fitted range was constant and std was forced to 1.
  bool degenerate = false;

  static Normalizer fit(const SpeedSeries& series, std::size_t begin_step, std::size_t end_step);
  double normalize(double v) const { return (v - mean) / std; }
  double denormalize(double v) const { return v * std + mean; }
};

struct SplitRatios {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;

  void validate() const;
};

// Chronological split: train = floor(train·T), val = floor(val·T), test = rest.
struct SplitBounds {
  std::size_t train_end = 0;
  std::size_t val_end = 0;
  std::size_t total = 0;
};
SplitBounds split_bounds(std::size_t n_steps, const SplitRatios& ratios);

/// Sliding windows confined to one contiguous segment. A window starting at
/// s reads inputs s .. s+T-1 and targets s+T-1+h for h = 1..H.
struct WindowSet {
  std::size_t segment_begin = 0;
  std::size_t segment_end = 0;
  std::size_t input_window = 0;
  std::size_t max_horizon = 0;
  std::vector<std::size_t> starts;

  std::size_t size() const { return starts.size(); }
  bool empty() const { return starts.empty(); }
};

WindowSet make_windows(std::size_t segment_begin, std::size_t segment_end, std::size_t input_window,
                       std::size_t max_horizon);

struct DatasetSplits {
  SplitBounds bounds;
  WindowSet train;
  WindowSet val;
  WindowSet test;
  std::vector<std::string> warnings;
};

DatasetSplits split_and_window(std::size_t n_steps, const SplitRatios& ratios, std::size_t input_window,
                               std::size_t max_horizon);

/// One minibatch in normalized units: x is [B, T, N, 1], y is [B, N, H].
struct Batch {
  Tensor x;
  Tensor y;
  std::vector<std::size_t> starts;
};

Batch make_batch(const SpeedSeries& series, const Normalizer& normalizer, const WindowSet& windows,
                 std::span<const std::size_t> window_indices);

struct DatasetManifest {
  std::string name = "dataset";
  std::size_t n_nodes = 0;
  std::size_t n_steps = 0;
  double interval_minutes = 5.0;
  std::string speed_file;
  std::string speed_format = "csv";  // csv | f64le
  std::string graph_file;
  std::string graph_format = "edges";  // edges | dense
  double kernel_sigma = 0.0;           // 0 selects the std of edge costs
  double threshold_eps = 0.1;
  std::optional<std::size_t> n_edges;
  std::string start_timestamp;

  // Relative file paths resolve against the manifest's directory.
  static DatasetManifest load(const std::string& path);
  void save(const std::string& path) const;
  std::string resolve(const std::string& file) const;

  std::string base_dir;
};

struct Dataset {
  DatasetManifest manifest;
  SpeedSeries series;
  TrafficGraph graph;
};

SpeedSeries read_speed_csv(const std::string& path, std::size_t n_steps, std::size_t n_nodes);
SpeedSeries read_speed_f64le(const std::string& path, std::size_t n_steps, std::size_t n_nodes);
void write_speed_csv(const std::string& path, const SpeedSeries& series);
void write_speed_f64le(const std::string& path, const SpeedSeries& series);

// Throws IngestionError whenever a file disagrees with the manifest.
Dataset load_dataset(const DatasetManifest& manifest);

}  // namespace stssl

#endif  // STSSL_DATA_HPP
