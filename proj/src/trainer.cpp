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
#include "stssl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "stssl/encoder.hpp"
#include "stssl/errors.hpp"
#include "stssl/evaluation.hpp"
#include "stssl/model.hpp"
#include "stssl/ssl.hpp"

namespace stssl {

namespace {

// Stream tags for derive_seed(seed, epoch, tag).
constexpr std::uint64_t kGraphStream = 0;
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kFirstBatchStream = 2;

struct EpochContext {
  HeterogeneityScores scores;
  GraphPerturbation graph;
  std::vector<Tensor> basis_aug;
};

EpochContext prepare_epoch(const ParameterStore& params, const TrainConfig& config, const Normalizer& normalizer,
                           const SpeedSeries& series, const TrafficGraph& graph, const std::vector<Tensor>& basis,
                           const WindowSet& train, std::size_t epoch) {
  EpochContext ctx;
  {
    NoGradGuard no_grad;
    const auto idx = scoring_indices(train, config.batch_size);
    const Batch batch = make_batch(series, normalizer, train, idx);
    const EncoderOutput enc = encode(params, config.encoder, batch.x, basis);
    ctx.scores = score_heterogeneity(enc.layers.front().x_temporal, params.get("augment.w0"));
  }
  Rng rng(derive_seed(config.seed, epoch, kGraphStream));
  ctx.graph = perturb_graph(graph.adjacency, ctx.scores.eta, config.augment, rng);
  const TrafficGraph aug = TrafficGraph::from_adjacency(ctx.graph.adjacency);
  ctx.basis_aug = basis_tensors(chebyshev_basis(aug.scaled_laplacian, config.encoder.cheb_order));
  return ctx;
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

std::string TrainHistory::csv_row(const EpochRecord& r) {
  std::ostringstream out;
  out << r.epoch << ',' << format_double(r.loss) << ',' << format_double(r.l_p) << ',' << format_double(r.l_s) << ','
      << format_double(r.l_t) << ',' << format_double(r.val_mae) << ',' << format_double(r.val_rmse);
  return out.str();
}

void TrainHistory::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IngestionError("cannot write history to " + path);
  out << csv_header() << '\n';
  for (const auto& r : records) out << csv_row(r) << '\n';
}

std::vector<std::size_t> scoring_indices(const WindowSet& windows, std::size_t batch_size) {
  const std::size_t count = std::min(windows.size(), batch_size);
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i * windows.size() / count;
  return idx;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config, const TrainOptions& options) {
  config.validate();
  reuse_large_allocations();
  const SpeedSeries& series = dataset.series;
  TrainResult result;
  result.splits = split_and_window(series.n_steps, config.split, config.input_window, config.max_horizon());
  const WindowSet& train_windows = result.splits.train;
  const WindowSet& val_windows = result.splits.val;
  if (train_windows.empty()) {
    throw ConfigError("training split of " + std::to_string(result.splits.bounds.train_end) +
                      " steps holds no complete window");
  }

  Checkpoint state;
  state.config = config;
  state.params = init_model_parameters(config);
  state.adam = AdamState::for_parameters(state.params);
  state.normalizer = Normalizer::fit(series, 0, result.splits.bounds.train_end);
  state.seed = config.seed;
  state.epoch = 0;

  const std::vector<Tensor> basis =
      basis_tensors(chebyshev_basis(dataset.graph.scaled_laplacian, config.encoder.cheb_order));
  const bool use_ssl = config.loss_weights.spatial > 0.0 || config.loss_weights.temporal > 0.0;

  if (!options.history_path.empty()) {
    std::ofstream out(options.history_path, std::ios::trunc);
    if (!out) throw IngestionError("cannot write history to " + options.history_path);
    out << TrainHistory::csv_header() << '\n';
  }

  result.best = state.clone();
  double best_val = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochContext ctx;
    if (use_ssl) {
      ctx = prepare_epoch(state.params, config, state.normalizer, series, dataset.graph, basis, train_windows, epoch);
    }

    std::vector<std::size_t> order(train_windows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, epoch, kShuffleStream));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double sum_loss = 0.0, sum_p = 0.0, sum_s = 0.0, sum_t = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::span<const std::size_t> chunk(order.data() + begin, end - begin);
      const Batch batch = make_batch(series, state.normalizer, train_windows, chunk);
      Rng rng(derive_seed(config.seed, epoch, kFirstBatchStream + batch_index));

      TrainingInputs inputs;
      inputs.x = batch.x;
      inputs.y = batch.y;
      inputs.basis = &basis;
      if (use_ssl) {
        inputs.x_aug = mask_sequence(batch.x, ctx.scores.u, config.augment.mask_ratio, rng).x_masked;
        inputs.basis_aug = &ctx.basis_aug;
        inputs.negative_steps = random_derangement(config.input_window, rng);
      }
      const TrainingForward fwd = training_forward(state.params, config, inputs);
      const double loss = fwd.loss.item();
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + " (L_p=" + format_double(fwd.terms.prediction.item()) + ")");
      }
      backward(fwd.loss);
      if (config.grad_clip > 0.0) clip_gradients(state.params, config.grad_clip);
      adam_step(state.params, state.adam, config.learning_rate);
      renormalize_prototypes(state.params.get("ssl.prototypes"));

      const double weight = static_cast<double>(chunk.size());
      sum_loss += weight * loss;
      sum_p += weight * fwd.terms.prediction.item();
      if (fwd.terms.spatial.defined()) sum_s += weight * fwd.terms.spatial.item();
      if (fwd.terms.temporal.defined()) sum_t += weight * fwd.terms.temporal.item();
    }
    state.epoch = epoch;

    EpochRecord record;
    record.epoch = epoch;
    const double n = static_cast<double>(order.size());
    record.loss = sum_loss / n;
    record.l_p = sum_p / n;
    record.l_s = sum_s / n;
    record.l_t = sum_t / n;
    double selection = record.loss;
    if (!val_windows.empty()) {
      const MetricsReport val = evaluate(state.params, config, state.normalizer, series, basis, val_windows,
                                         config.horizons, dataset.manifest.interval_minutes);
      record.val_mae = val.mean_mae();
      record.val_rmse = val.mean_rmse();
      selection = record.val_mae;
    } else {
      record.val_mae = std::numeric_limits<double>::quiet_NaN();
      record.val_rmse = std::numeric_limits<double>::quiet_NaN();
    }
    result.history.records.push_back(record);
    if (!options.history_path.empty()) {
      std::ofstream out(options.history_path, std::ios::app);
      out << TrainHistory::csv_row(record) << '\n';
    }
    if (selection <= best_val || val_windows.empty()) {
      best_val = selection;
      result.best = state.clone();
    }
    if (options.on_epoch) options.on_epoch(record);
    if (options.should_stop && options.should_stop(record)) break;
  }
  result.last = std::move(state);
  return result;
}

AugmentationReport inspect_augmentation(const Checkpoint& checkpoint, const Dataset& dataset) {
  const TrainConfig& config = checkpoint.config;
  const DatasetSplits splits =
      split_and_window(dataset.series.n_steps, config.split, config.input_window, config.max_horizon());
  if (splits.train.empty()) throw ConfigError("training split holds no complete window");
  const std::vector<Tensor> basis =
      basis_tensors(chebyshev_basis(dataset.graph.scaled_laplacian, config.encoder.cheb_order));
  const std::size_t epoch = checkpoint.epoch + 1;
  EpochContext ctx = prepare_epoch(checkpoint.params, config, checkpoint.normalizer, dataset.series, dataset.graph,
                                   basis, splits.train, epoch);

  AugmentationReport report;
  report.scores = std::move(ctx.scores);
  report.graph = std::move(ctx.graph);
  report.mask_probability = mask_probabilities(report.scores.u, config.augment.mask_ratio);

  const auto idx = scoring_indices(splits.train, config.batch_size);
  const Batch batch = make_batch(dataset.series, checkpoint.normalizer, splits.train, idx);
  Rng rng(derive_seed(config.seed, epoch, kFirstBatchStream));
  const MaskedSequence masked = mask_sequence(batch.x, report.scores.u, config.augment.mask_ratio, rng);
  const std::size_t steps = config.input_window;
  const std::size_t nodes = dataset.series.n_nodes;
  report.mask_rate = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(nodes));
  for (std::size_t i = 0; i < masked.mask.size(); ++i) {
    const auto n = static_cast<Eigen::Index>(i % nodes);
    const auto t = static_cast<Eigen::Index>((i / nodes) % steps);
    report.mask_rate(t, n) += masked.mask[i];
  }
  report.mask_rate /= static_cast<double>(idx.size());
  return report;
}

std::vector<std::string> write_augmentation_report(const AugmentationReport& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IngestionError("cannot create " + dir + ": " + ec.message());
  std::vector<std::string> written;
  auto open = [&](const std::string& name) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IngestionError("cannot write " + path);
    out << std::setprecision(17);
    written.push_back(path);
    return out;
  };

  {
    auto out = open("u.csv");
    out << "step";
    for (Eigen::Index n = 0; n < report.scores.u.cols(); ++n) out << ",node" << n;
    out << '\n';
    for (Eigen::Index t = 0; t < report.scores.u.rows(); ++t) {
      out << t;
      for (Eigen::Index n = 0; n < report.scores.u.cols(); ++n) out << ',' << report.scores.u(t, n);
      out << '\n';
    }
  }
  {
    auto out = open("eta.csv");
    out << "node";
    for (Eigen::Index j = 0; j < report.scores.eta.cols(); ++j) out << ",node" << j;
    out << '\n';
    for (Eigen::Index i = 0; i < report.scores.eta.rows(); ++i) {
      out << i;
      for (Eigen::Index j = 0; j < report.scores.eta.cols(); ++j) out << ',' << report.scores.eta(i, j);
      out << '\n';
    }
  }
  {
    auto out = open("mask_rates.csv");
    out << "step,node,probability,empirical_rate\n";
    for (Eigen::Index t = 0; t < report.mask_probability.rows(); ++t) {
      for (Eigen::Index n = 0; n < report.mask_probability.cols(); ++n) {
        out << t << ',' << n << ',' << report.mask_probability(t, n) << ',' << report.mask_rate(t, n) << '\n';
      }
    }
  }
  {
    auto out = open("edges_removed.csv");
    out << "from,to\n";
    for (const auto& [i, j] : report.graph.edges_removed) out << i << ',' << j << '\n';
  }
  {
    auto out = open("edges_added.csv");
    out << "from,to,weight\n";
    for (const auto& [i, j] : report.graph.edges_added) {
      out << i << ',' << j << ',' << report.graph.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))
          << '\n';
    }
  }
  return written;
}

}  // namespace stssl
