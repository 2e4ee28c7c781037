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
#ifndef STSSL_EVALUATION_HPP
#define STSSL_EVALUATION_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stssl/checkpoint.hpp"
#include "stssl/config.hpp"
#include "stssl/data.hpp"
#include "stssl/metrics.hpp"
#include "stssl/tensor.hpp"

namespace stssl {

/// Denormalized predictions for a window set, laid out [sample][node][horizon].
struct PredictionSet {
  std::size_t n_nodes = 0;
  std::vector<std::size_t> horizons;  // steps
  std::vector<std::size_t> starts;    // window start step per sample
  std::vector<double> y_true;
  std::vector<double> y_pred;

  std::size_t n_samples() const { return starts.size(); }
  std::size_t index(std::size_t sample, std::size_t node, std::size_t h) const {
    return (sample * n_nodes + node) * horizons.size() + h;
  }
};

// Converts minute offsets to steps. ConfigError unless each is a positive multiple of the interval.
std::vector<std::size_t> horizons_from_minutes(std::span<const double> minutes, double interval_minutes);

// ConfigError when a horizon is 0 or beyond the trained max horizon.
void check_horizons(std::span<const std::size_t> horizons, std::size_t max_horizon);

PredictionSet collect_predictions(const ParameterStore& params, const TrainConfig& config,
                                  const Normalizer& normalizer, const SpeedSeries& series,
                                  const std::vector<Tensor>& basis, const WindowSet& windows,
                                  std::span<const std::size_t> horizons);
PredictionSet collect_predictions(const Checkpoint& checkpoint, const Dataset& dataset, const WindowSet& windows,
                                  std::span<const std::size_t> horizons);

MetricsReport report_from_predictions(const PredictionSet& predictions, double interval_minutes);

/// Runs the model without augmentation and reports metrics per horizon in
/// real speed units. Pure: identical inputs give identical reports.
MetricsReport evaluate(const ParameterStore& params, const TrainConfig& config, const Normalizer& normalizer,
                       const SpeedSeries& series, const std::vector<Tensor>& basis, const WindowSet& windows,
                       std::span<const std::size_t> horizons, double interval_minutes);
MetricsReport evaluate(const Checkpoint& checkpoint, const Dataset& dataset, const WindowSet& windows,
                       std::span<const std::size_t> horizons);

// Last observed input value repeated for every horizon.
PredictionSet persistence_predictions(const SpeedSeries& series, const WindowSet& windows,
                                      std::span<const std::size_t> horizons);
MetricsReport baseline_persistence(const SpeedSeries& series, const WindowSet& windows,
                                   std::span<const std::size_t> horizons, double interval_minutes);

// CSV `sample,node,horizon,y_true,y_pred`; horizon in steps.
void write_predictions_csv(const std::string& path, const PredictionSet& predictions);

}  // namespace stssl

#endif  // STSSL_EVALUATION_HPP
