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
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "stssl/checkpoint.hpp"
#include "stssl/errors.hpp"
#include "stssl/evaluation.hpp"
#include "stssl/gradcheck.hpp"
#include "stssl/model.hpp"
#include "stssl/ops.hpp"
#include "stssl/optim.hpp"
#include "stssl/ssl.hpp"
#include "stssl/trainer.hpp"
#include "test_util.hpp"

namespace stssl {
namespace {

using testing::random_tensor;
using testing::synthetic_dataset;
using testing::toy_config;

SyntheticSpec small_spec(std::size_t n_nodes, std::size_t n_steps) {
  SyntheticSpec s;
  s.n_nodes = n_nodes;
  s.n_steps = n_steps;
  s.period_steps = 24;
  s.amplitude = 10.0;
  return s;
}

TEST(PredictionHead, ZeroWeightsReturnBias) {
  TrainConfig c = toy_config();
  ParameterStore store = init_model_parameters(c);
  store.get("head.fc1.weight").mutable_data()[0] = 0.0;
  for (double& v : store.get("head.fc2.weight").mutable_data()) v = 0.0;
  auto bias = store.get("head.fc2.bias").mutable_data();
  for (std::size_t h = 0; h < bias.size(); ++h) bias[h] = static_cast<double>(h) + 0.5;
  Rng rng(1);
  const Tensor out = prediction_head(store, random_tensor({2, 4, 8}, rng));
  ASSERT_EQ(out.shape(), (Shape{2, 4, 3}));
  for (std::size_t i = 0; i < out.numel(); ++i) EXPECT_EQ(out.data()[i], static_cast<double>(i % 3) + 0.5);
}

TEST(PredictionHead, GradientCheck) {
  TrainConfig c = toy_config();
  const ParameterStore full = init_model_parameters(c);
  ParameterStore head;
  for (const auto& [name, value] : full) {
    if (name.rfind("head.", 0) == 0) head.add(name, value.clone());
  }
  Rng rng(2);
  // Shift the bias away from the ReLU kink so central differences stay on one side.
  for (double& v : head.get("head.fc1.bias").mutable_data()) v = 0.3;
  const Tensor pooled = random_tensor({2, 4, 8}, rng);
  const Tensor y = random_tensor({2, 4, 3}, rng);
  auto f = [&]() { return sum(mul(prediction_head(head, pooled), y)); };
  EXPECT_LE(finite_difference_check(f, head), 1e-4);
}

TEST(PredictionLoss, Examples) {
  EXPECT_DOUBLE_EQ(prediction_loss(Tensor::from({2}, {2, 4}), Tensor::from({2}, {3, 3})).item(), 1.0);
  EXPECT_EQ(prediction_loss(Tensor::from({3}, {1, 2, 3}), Tensor::from({3}, {1, 2, 3})).item(), 0.0);
  EXPECT_THROW(prediction_loss(Tensor::zeros({2}), Tensor::zeros({3})), DimensionError);
}

TEST(TotalLoss, WeightedSum) {
  LossTerms t{Tensor::scalar(1.0), Tensor::scalar(2.0), Tensor::scalar(3.0)};
  EXPECT_EQ(total_loss(t, LossWeights{}).item(), 6.0);
  EXPECT_DOUBLE_EQ(total_loss(t, LossWeights{0.5, 0.0, 2.0}).item(), 6.5);
  EXPECT_EQ(total_loss(t, LossWeights{0.0, 0.0, 0.0}).item(), 0.0);
}

struct ToyStep {
  TrainConfig config = toy_config();
  ParameterStore store;
  std::vector<Tensor> basis;
  TrainingInputs inputs;

  ToyStep() {
    config.encoder.d_model = 8;
    store = init_model_parameters(config);
    Rng rng(3);
    const Eigen::MatrixXd a = build_adjacency(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}}, 1.0, 0.1);
    basis = basis_tensors(chebyshev_basis(TrafficGraph::from_adjacency(a).scaled_laplacian, 2));
    inputs.x = random_tensor({2, 6, 4, 1}, rng);
    inputs.x_aug = random_tensor({2, 6, 4, 1}, rng);
    inputs.y = random_tensor({2, 4, 3}, rng);
    inputs.basis = &basis;
    inputs.basis_aug = &basis;
    inputs.negative_steps = random_derangement(6, rng);
  }
};

TEST(TotalLoss, GradientIsLinearInTheTerms) {
  ToyStep s;
  const LossWeights w{0.7, 1.3, 2.1};
  s.config.loss_weights = w;
  backward(training_forward(s.store, s.config, s.inputs).loss);
  std::map<std::string, std::vector<double>> combined;
  for (auto& [name, value] : s.store) {
    combined[name] = value.has_grad() ? std::vector<double>(value.grad().begin(), value.grad().end())
                                      : std::vector<double>(value.numel(), 0.0);
  }
  s.store.zero_grad();
  const TrainingForward fwd = training_forward(s.store, s.config, s.inputs);
  backward(scale(fwd.terms.prediction, w.prediction));
  backward(scale(fwd.terms.spatial, w.spatial));
  backward(scale(fwd.terms.temporal, w.temporal));
  double worst = 0.0;
  for (auto& [name, value] : s.store) {
    for (std::size_t i = 0; i < value.numel(); ++i) {
      const double g = value.has_grad() ? value.grad()[i] : 0.0;
      worst = std::max(worst, std::abs(g - combined[name][i]));
    }
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParameterStore store;
  store.add("w", Tensor::from({3}, {1.0, 1.0, 1.0}));
  store.get("w").mutable_grad()[0] = 4.0;
  store.get("w").mutable_grad()[1] = -0.25;
  AdamState state = AdamState::for_parameters(store);
  adam_step(store, state, 0.001);
  EXPECT_NEAR(store.get("w").data()[0], 1.0 - 0.001, 1e-9);
  EXPECT_NEAR(store.get("w").data()[1], 1.0 + 0.001, 1e-9);
  EXPECT_EQ(store.get("w").data()[2], 1.0);
  EXPECT_EQ(state.step, 1u);
  for (double g : store.get("w").grad()) EXPECT_EQ(g, 0.0);
}

TEST(Adam, MatchesScalarLoop) {
  ParameterStore store;
  store.add("w", Tensor::from({1}, {0.0}));
  AdamState state = AdamState::for_parameters(store);
  double w = 0.0, m = 0.0, v = 0.0;
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (int t = 1; t <= 100; ++t) {
    const Tensor& p = store.get("w");
    const Tensor diff = add_scalar(p, -3.0);
    backward(mul(diff, diff));
    adam_step(store, state, lr);
    const double g = 2.0 * (w - 3.0);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    w -= lr * mh / (std::sqrt(vh) + eps);
    ASSERT_NEAR(store.get("w").data()[0], w, 1e-12) << "step " << t;
  }
  EXPECT_LT(std::abs(w - 3.0), std::abs(0.0 - 3.0));
}

TEST(Adam, ClipGradients) {
  ParameterStore store;
  store.add("a", Tensor::from({2}, {0, 0}));
  store.get("a").mutable_grad()[0] = 3.0;
  store.get("a").mutable_grad()[1] = 4.0;
  EXPECT_DOUBLE_EQ(gradient_norm(store), 5.0);
  EXPECT_DOUBLE_EQ(clip_gradients(store, 1.0), 5.0);
  EXPECT_NEAR(gradient_norm(store), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(clip_gradients(store, 10.0), 1.0);
  EXPECT_NEAR(gradient_norm(store), 1.0, 1e-15);
  EXPECT_THROW(clip_gradients(store, 0.0), ContractError);
}

TEST(Splits, FloorRule) {
  const SplitBounds b = split_bounds(26208, SplitRatios{});
  EXPECT_EQ(b.train_end, 18345u);
  EXPECT_EQ(b.val_end - b.train_end, 2620u);
  EXPECT_EQ(b.total - b.val_end, 5243u);
}

TEST(Splits, WindowCounts) {
  EXPECT_EQ(make_windows(0, 100, 12, 12).size(), 77u);
  EXPECT_EQ(make_windows(50, 74, 12, 12).size(), 1u);
  EXPECT_EQ(make_windows(0, 23, 12, 12).size(), 0u);
}

TEST(Splits, NoLeakageAcrossSegments) {
  const DatasetSplits s = split_and_window(2000, SplitRatios{}, 12, 12);
  for (const WindowSet* w : {&s.train, &s.val, &s.test}) {
    for (std::size_t start : w->starts) {
      EXPECT_GE(start, w->segment_begin);
      EXPECT_LE(start + 12 + 12, w->segment_end);
    }
  }
  EXPECT_EQ(s.train.segment_end, s.val.segment_begin);
  EXPECT_EQ(s.val.segment_end, s.test.segment_begin);
}

TEST(Normalizer, RoundTripAndDegenerate) {
  SpeedSeries s{4, 2, {60, 61, 55, 70, 40, 65, 58, 62}};
  const Normalizer n = Normalizer::fit(s, 0, 4);
  for (double v : s.values) EXPECT_NEAR(n.denormalize(n.normalize(v)), v, 1e-12);
  // Statistics come from the fitted range only.
  const Normalizer head = Normalizer::fit(s, 0, 2);
  EXPECT_DOUBLE_EQ(head.mean, (60 + 61 + 55 + 70) / 4.0);
  SpeedSeries flat{3, 1, {5, 5, 5}};
  const Normalizer d = Normalizer::fit(flat, 0, 3);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.std, 1.0);
  EXPECT_EQ(d.normalize(5.0), 0.0);
}

TEST(Config, ParseRoundTripAndErrors) {
  TrainConfig c = toy_config();
  c.learning_rate = 0.0012345678901234567;
  c.seed = 99;
  const TrainConfig back = TrainConfig::parse(c.to_text(), "<text>");
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.learning_rate, c.learning_rate);
  EXPECT_THROW(TrainConfig::parse("no_such_key = 1\n", "<text>"), ConfigError);
  EXPECT_THROW(TrainConfig::parse("learning_rate = -1\n", "<text>"), ConfigError);
  EXPECT_THROW(TrainConfig::parse("horizons = 0\n", "<text>"), ConfigError);
  EXPECT_THROW(TrainConfig::load("/nonexistent/config.txt"), ConfigError);
}

TEST(Checkpoint, RoundTripIsExact) {
  const Dataset ds = synthetic_dataset(small_spec(4, 160));
  TrainConfig c = toy_config();
  c.epochs = 2;
  const TrainResult r = train(ds, c);
  const std::string bytes = r.best.to_bytes();
  const Checkpoint back = Checkpoint::from_bytes(bytes);
  EXPECT_EQ(back.to_bytes(), bytes);
  EXPECT_EQ(back.epoch, r.best.epoch);
  const MetricsReport a = evaluate(r.best, ds, r.splits.val, c.horizons);
  const MetricsReport b = evaluate(back, ds, r.splits.val, c.horizons);
  ASSERT_EQ(a.horizons.size(), b.horizons.size());
  for (std::size_t i = 0; i < a.horizons.size(); ++i) {
    EXPECT_EQ(a.horizons[i].metrics.mae, b.horizons[i].metrics.mae);
    EXPECT_EQ(a.horizons[i].metrics.rmse, b.horizons[i].metrics.rmse);
  }
  const std::string path = ::testing::TempDir() + "/stssl_ckpt.bin";
  r.best.save(path);
  EXPECT_EQ(Checkpoint::load(path).to_bytes(), bytes);
}

TEST(Checkpoint, MalformedInputIsIngestionError) {
  EXPECT_THROW(Checkpoint::from_bytes("NOTACKPT"), IngestionError);
  Checkpoint ck;
  ck.config = toy_config();
  ck.params = init_model_parameters(ck.config);
  ck.adam = AdamState::for_parameters(ck.params);
  const std::string bytes = ck.to_bytes();
  EXPECT_THROW(Checkpoint::from_bytes(bytes.substr(0, bytes.size() - 3)), IngestionError);
  EXPECT_THROW(Checkpoint::from_bytes(bytes + "x"), IngestionError);
  EXPECT_THROW(Checkpoint::load("/nonexistent/ckpt.bin"), IngestionError);
}

TEST(Trainer, ZeroEpochsGiveEmptyHistory) {
  const Dataset ds = synthetic_dataset(small_spec(4, 120));
  TrainConfig c = toy_config();
  c.epochs = 0;
  const TrainResult r = train(ds, c);
  EXPECT_TRUE(r.history.records.empty());
  EXPECT_EQ(r.last.epoch, 0u);
}

TEST(Trainer, TinyOverfitWithoutSsl) {
  const Dataset ds = synthetic_dataset(small_spec(4, 120));
  TrainConfig c;
  c.loss_weights.spatial = 0.0;
  c.loss_weights.temporal = 0.0;
  c.augment.mask_ratio = 0.0;
  c.epochs = 40;
  const TrainResult r = train(ds, c);
  ASSERT_EQ(r.history.records.size(), 40u);
  for (std::size_t e = 1; e < 10; ++e) {
    EXPECT_LT(r.history.records[e].loss, r.history.records[e - 1].loss) << "epoch " << e + 1;
  }

  TrainConfig untrained_config = c;
  untrained_config.epochs = 0;
  const TrainResult untrained = train(ds, untrained_config);
  const double initial = evaluate(untrained.last, ds, r.splits.train, c.horizons).mean_mae();
  const double final_mae = evaluate(r.last, ds, r.splits.train, c.horizons).mean_mae();
  EXPECT_LT(final_mae, 0.3 * initial) << "initial " << initial << " final " << final_mae;
}

TEST(Trainer, SeededRunsAreBitIdentical) {
  const Dataset ds = synthetic_dataset(small_spec(4, 160));
  TrainConfig c = toy_config();
  c.epochs = 2;
  const TrainResult a = train(ds, c);
  const TrainResult b = train(ds, c);
  ASSERT_EQ(a.history.records.size(), b.history.records.size());
  for (std::size_t i = 0; i < a.history.records.size(); ++i) {
    EXPECT_EQ(TrainHistory::csv_row(a.history.records[i]), TrainHistory::csv_row(b.history.records[i]));
    EXPECT_EQ(a.history.records[i].loss, b.history.records[i].loss);
  }
  EXPECT_EQ(a.last.to_bytes(), b.last.to_bytes());
  c.seed = 43;
  const TrainResult other = train(ds, c);
  EXPECT_NE(other.history.records[0].loss, a.history.records[0].loss);
}

TEST(Trainer, NonFiniteLossIsNumericError) {
  Dataset ds = synthetic_dataset(small_spec(4, 160));
  ds.series.values[4 * 20 + 1] = std::numeric_limits<double>::quiet_NaN();
  TrainConfig c = toy_config();
  c.epochs = 1;
  // The NaN also poisons the normalizer, so any step surfaces it.
  EXPECT_THROW(train(ds, c), NumericError);
}

TEST(Trainer, HistoryCsvAndCallback) {
  const Dataset ds = synthetic_dataset(small_spec(4, 160));
  TrainConfig c = toy_config();
  c.epochs = 2;
  TrainOptions opt;
  opt.history_path = ::testing::TempDir() + "/stssl_history.csv";
  std::remove(opt.history_path.c_str());
  std::size_t calls = 0;
  opt.on_epoch = [&](const EpochRecord& r) { EXPECT_EQ(r.epoch, ++calls); };
  const TrainResult r = train(ds, c, opt);
  EXPECT_EQ(calls, 2u);
  std::ifstream in(opt.history_path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, TrainHistory::csv_header());
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2u);
  for (const EpochRecord& e : r.history.records) {
    EXPECT_TRUE(std::isfinite(e.l_s));
    EXPECT_TRUE(std::isfinite(e.l_t));
    EXPECT_GE(e.l_s, 0.0);
    EXPECT_GE(e.l_t, 0.0);
  }
}

TEST(Trainer, StopCallbackEndsTrainingEarly) {
  const Dataset ds = synthetic_dataset(small_spec(4, 160));
  TrainConfig c = toy_config();
  c.epochs = 5;
  TrainOptions opt;
  opt.should_stop = [](const EpochRecord& r) { return r.epoch == 2; };
  const TrainResult r = train(ds, c, opt);
  ASSERT_EQ(r.history.records.size(), 2u);
  EXPECT_EQ(r.last.epoch, 2u);
}

TEST(Trainer, NoTrainingWindowsIsConfigError) {
  const Dataset ds = synthetic_dataset(small_spec(4, 12));
  EXPECT_THROW(train(ds, toy_config()), ConfigError);
}

TEST(Trainer, ScoringIndicesAreSpread) {
  const WindowSet w = make_windows(0, 200, 12, 12);
  const auto idx = scoring_indices(w, 8);
  ASSERT_EQ(idx.size(), 8u);
  for (std::size_t i = 1; i < idx.size(); ++i) EXPECT_GT(idx[i], idx[i - 1]);
  EXPECT_LT(idx.back(), w.size());
  EXPECT_EQ(scoring_indices(make_windows(0, 27, 12, 12), 8).size(), 4u);
}

}  // namespace
}  // namespace stssl
