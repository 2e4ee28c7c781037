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
#include "stssl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "stssl/errors.hpp"
#include "stssl/model.hpp"

namespace stssl {

std::vector<std::size_t> horizons_from_minutes(std::span<const double> minutes, double interval_minutes) {
  if (!(interval_minutes > 0.0)) throw ConfigError("sampling interval must be positive");
  std::vector<std::size_t> steps;
  for (double m : minutes) {
    const double ratio = m / interval_minutes;
    const double rounded = std::round(ratio);
    if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9) {
      std::ostringstream msg;
      msg << "horizon " << m << " min is not a positive multiple of the " << interval_minutes << "-minute interval";
      throw ConfigError(msg.str());
    }
    steps.push_back(static_cast<std::size_t>(rounded));
  }
  return steps;
}

void check_horizons(std::span<const std::size_t> horizons, std::size_t max_horizon) {
  if (horizons.empty()) throw ConfigError("at least one horizon is required");
  for (std::size_t h : horizons) {
    if (h == 0 || h > max_horizon) {
      throw ConfigError("horizon " + std::to_string(h) + " steps is outside the trained range 1.." +
                        std::to_string(max_horizon));
    }
  }
}

namespace {

void require_windows(const WindowSet& windows) {
  if (windows.empty()) throw ConfigError("evaluation needs at least one window");
}

}  // namespace

PredictionSet collect_predictions(const ParameterStore& params, const TrainConfig& config,
                                  const Normalizer& normalizer, const SpeedSeries& series,
                                  const std::vector<Tensor>& basis, const WindowSet& windows,
                                  std::span<const std::size_t> horizons) {
  check_horizons(horizons, config.max_horizon());
  require_windows(windows);
  if (windows.input_window != config.input_window) throw ConfigError("window length differs from the model's");
  PredictionSet out;
  out.n_nodes = series.n_nodes;
  out.horizons.assign(horizons.begin(), horizons.end());
  out.starts = windows.starts;
  const std::size_t n_h = horizons.size();
  out.y_true.resize(windows.size() * series.n_nodes * n_h);
  out.y_pred.resize(out.y_true.size());
  const std::size_t max_h = config.max_horizon();

  std::vector<std::size_t> indices(windows.size());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  for (std::size_t begin = 0; begin < indices.size(); begin += config.batch_size) {
    const std::size_t end = std::min(indices.size(), begin + config.batch_size);
    std::span<const std::size_t> chunk(indices.data() + begin, end - begin);
    const Batch batch = make_batch(series, normalizer, windows, chunk);
    const Tensor y_hat = predict(params, config, batch.x, basis);
    const auto pred = y_hat.data();
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const std::size_t sample = begin + i;
      const std::size_t last_input = windows.starts[sample] + windows.input_window - 1;
      for (std::size_t node = 0; node < series.n_nodes; ++node) {
        for (std::size_t k = 0; k < n_h; ++k) {
          const std::size_t h = horizons[k];
          const std::size_t slot = out.index(sample, node, k);
          out.y_true[slot] = series.at(last_input + h, node);
          out.y_pred[slot] = normalizer.denormalize(pred[(i * series.n_nodes + node) * max_h + (h - 1)]);
        }
      }
    }
  }
  return out;
}

PredictionSet collect_predictions(const Checkpoint& checkpoint, const Dataset& dataset, const WindowSet& windows,
                                  std::span<const std::size_t> horizons) {
  const ChebyshevBasis basis = chebyshev_basis(dataset.graph.scaled_laplacian, checkpoint.config.encoder.cheb_order);
  return collect_predictions(checkpoint.params, checkpoint.config, checkpoint.normalizer, dataset.series,
                             basis_tensors(basis), windows, horizons);
}

MetricsReport report_from_predictions(const PredictionSet& predictions, double interval_minutes) {
  MetricsReport report;
  const std::size_t n_h = predictions.horizons.size();
  const std::size_t per_h = predictions.n_samples() * predictions.n_nodes;
  std::vector<double> y(per_h);
  std::vector<double> y_hat(per_h);
  for (std::size_t k = 0; k < n_h; ++k) {
    for (std::size_t i = 0; i < per_h; ++i) {
      y[i] = predictions.y_true[i * n_h + k];
      y_hat[i] = predictions.y_pred[i * n_h + k];
    }
    HorizonMetrics row;
    row.horizon_steps = predictions.horizons[k];
    row.horizon_minutes = static_cast<double>(row.horizon_steps) * interval_minutes;
    row.metrics = compute_metrics(y, y_hat);
    report.horizons.push_back(row);
  }
  return report;
}

MetricsReport evaluate(const ParameterStore& params, const TrainConfig& config, const Normalizer& normalizer,
                       const SpeedSeries& series, const std::vector<Tensor>& basis, const WindowSet& windows,
                       std::span<const std::size_t> horizons, double interval_minutes) {
  return report_from_predictions(
      collect_predictions(params, config, normalizer, series, basis, windows, horizons), interval_minutes);
}

MetricsReport evaluate(const Checkpoint& checkpoint, const Dataset& dataset, const WindowSet& windows,
                       std::span<const std::size_t> horizons) {
  return report_from_predictions(collect_predictions(checkpoint, dataset, windows, horizons),
                                 dataset.manifest.interval_minutes);
}

PredictionSet persistence_predictions(const SpeedSeries& series, const WindowSet& windows,
                                      std::span<const std::size_t> horizons) {
  check_horizons(horizons, windows.max_horizon);
  require_windows(windows);
  PredictionSet out;
  out.n_nodes = series.n_nodes;
  out.horizons.assign(horizons.begin(), horizons.end());
  out.starts = windows.starts;
  out.y_true.resize(windows.size() * series.n_nodes * horizons.size());
  out.y_pred.resize(out.y_true.size());
  for (std::size_t sample = 0; sample < windows.size(); ++sample) {
    const std::size_t last_input = windows.starts[sample] + windows.input_window - 1;
    for (std::size_t node = 0; node < series.n_nodes; ++node) {
      for (std::size_t k = 0; k < horizons.size(); ++k) {
        const std::size_t slot = out.index(sample, node, k);
        out.y_true[slot] = series.at(last_input + horizons[k], node);
        out.y_pred[slot] = series.at(last_input, node);
      }
    }
  }
  return out;
}

MetricsReport baseline_persistence(const SpeedSeries& series, const WindowSet& windows,
                                   std::span<const std::size_t> horizons, double interval_minutes) {
  return report_from_predictions(persistence_predictions(series, windows, horizons), interval_minutes);
}

void write_predictions_csv(const std::string& path, const PredictionSet& predictions) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IngestionError("cannot write predictions to " + path);
  out << "sample,node,horizon,y_true,y_pred\n" << std::setprecision(17);
  for (std::size_t s = 0; s < predictions.n_samples(); ++s) {
    for (std::size_t n = 0; n < predictions.n_nodes; ++n) {
      for (std::size_t k = 0; k < predictions.horizons.size(); ++k) {
        const std::size_t slot = predictions.index(s, n, k);
        out << s << ',' << n << ',' << predictions.horizons[k] << ',' << predictions.y_true[slot] << ','
            << predictions.y_pred[slot] << '\n';
      }
    }
  }
  if (!out) throw IngestionError("failed writing predictions to " + path);
}

}  // namespace stssl
