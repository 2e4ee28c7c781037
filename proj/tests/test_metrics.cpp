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
#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "stssl/errors.hpp"
#include "stssl/evaluation.hpp"
#include "stssl/metrics.hpp"
#include "stssl/trainer.hpp"
#include "test_util.hpp"

namespace stssl {
namespace {

TEST(Metrics, HandComputedExample) {
  const std::vector<double> y{100, 50}, yh{90, 55};
  const Metrics m = compute_metrics(y, yh);
  EXPECT_DOUBLE_EQ(m.mae, 7.5);
  EXPECT_NEAR(m.mape, 10.0, 1e-12);
  EXPECT_NEAR(m.rmse, std::sqrt(62.5), 1e-12);
  EXPECT_NEAR(m.rmse, 7.9057, 1e-4);
  EXPECT_NEAR(m.smape, 100.0 * (10.0 / 95.0 + 5.0 / 52.5) / 2.0, 1e-12);
  EXPECT_NEAR(m.smape, 10.02506, 1e-5);
  EXPECT_EQ(m.count, 2u);
}

TEST(Metrics, PerfectPredictionIsZero) {
  const std::vector<double> y{3, 1, 4, 1, 5};
  const Metrics m = compute_metrics(y, y);
  EXPECT_EQ(m.mae, 0.0);
  EXPECT_EQ(m.mape, 0.0);
  EXPECT_EQ(m.rmse, 0.0);
  EXPECT_EQ(m.smape, 0.0);
}

TEST(Metrics, SmapeMaximum) {
  EXPECT_DOUBLE_EQ(compute_metrics(std::vector<double>{100}, std::vector<double>{0}).smape, 200.0);
}

TEST(Metrics, ConstantPredictorRmseIsPopulationStd) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist(60, 7);
  std::vector<double> y(500);
  for (double& v : y) v = dist(rng);
  const double mean = pairwise_sum(y) / static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  const std::vector<double> yh(y.size(), mean);
  EXPECT_NEAR(compute_metrics(y, yh).rmse, std::sqrt(var / static_cast<double>(y.size())), 1e-10);
}

TEST(Metrics, RmseBoundsMaeAndRanges) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(-100, 100);
  std::uniform_int_distribution<int> len(1, 50);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> y(static_cast<std::size_t>(len(rng))), yh(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = dist(rng);
      yh[i] = dist(rng);
    }
    const Metrics m = compute_metrics(y, yh);
    EXPECT_GE(m.rmse, m.mae * (1 - 1e-15));
    EXPECT_GE(m.mae, 0.0);
    EXPECT_GE(m.mape, 0.0);
    EXPECT_LE(m.smape, 200.0 + 1e-12);
  }
}

TEST(Metrics, MapeAndSmapeAgreeForSmallRelativeError) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(10, 100);
  std::vector<double> y(100), yh(100);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = dist(rng);
    yh[i] = y[i] * (1 + 1e-6);
  }
  const Metrics m = compute_metrics(y, yh);
  EXPECT_NEAR(m.mape, m.smape, 1e-9);
}

TEST(Metrics, SmapeSymmetricMapeNot) {
  const std::vector<double> y{10, 20, 30}, yh{12, 15, 33};
  const Metrics a = compute_metrics(y, yh);
  const Metrics b = compute_metrics(yh, y);
  EXPECT_NEAR(a.smape, b.smape, 1e-12);
  EXPECT_GT(std::abs(a.mape - b.mape), 1e-3);
}

TEST(Metrics, ZeroDenominatorsAreSkippedAndCounted) {
  const Metrics m = compute_metrics(std::vector<double>{0, 10}, std::vector<double>{1, 11});
  EXPECT_EQ(m.mape_skipped, 1u);
  EXPECT_NEAR(m.mape, 10.0, 1e-12);
  EXPECT_EQ(m.smape_skipped, 0u);
  const Metrics all = compute_metrics(std::vector<double>{0, 0}, std::vector<double>{0, 0});
  EXPECT_EQ(all.mape_skipped, 2u);
  EXPECT_EQ(all.smape_skipped, 2u);
  EXPECT_EQ(all.mape, 0.0);
  EXPECT_EQ(all.smape, 0.0);
}

TEST(Metrics, ContractErrors) {
  EXPECT_THROW(compute_metrics(std::vector<double>{}, std::vector<double>{}), ContractError);
  EXPECT_THROW(compute_metrics(std::vector<double>{1}, std::vector<double>{1, 2}), ContractError);
}

TEST(Metrics, PairwiseSumIsOrderStable) {
  std::vector<double> v(1001);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * static_cast<double>(i % 7);
  EXPECT_EQ(pairwise_sum(v), pairwise_sum(v));
  EXPECT_NEAR(pairwise_sum(v), std::accumulate(v.begin(), v.end(), 0.0), 1e-9);
}

TEST(Report, CsvHeaderAndShape) {
  MetricsReport r;
  for (std::size_t h : {6, 9, 12}) r.horizons.push_back({h, 5.0 * static_cast<double>(h), Metrics{1, 2, 3, 4, 5, 0, 0}});
  std::ostringstream csv;
  write_report_csv(csv, r);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "horizon_min,mae,mape,rmse,smape,skipped");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
  }
  EXPECT_EQ(rows, 3u);
  std::ostringstream table;
  print_report_table(table, r);
  EXPECT_NE(table.str().find("30 min"), std::string::npos);
  EXPECT_DOUBLE_EQ(r.mean_mae(), 1.0);
}

TEST(Horizons, MinutesToSteps) {
  const std::vector<double> minutes{30, 45, 60};
  EXPECT_EQ(horizons_from_minutes(minutes, 5.0), (std::vector<std::size_t>{6, 9, 12}));
  const std::vector<double> bad{7};
  EXPECT_THROW(horizons_from_minutes(bad, 5.0), ConfigError);
  const std::vector<std::size_t> too_far{13};
  EXPECT_THROW(check_horizons(too_far, 12), ConfigError);
}

SpeedSeries ramp(std::size_t steps, std::size_t nodes, double delta) {
  SpeedSeries s{steps, nodes, {}};
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t n = 0; n < nodes; ++n) s.values.push_back(delta * static_cast<double>(t) + static_cast<double>(n));
  }
  return s;
}

TEST(Persistence, ConstantSeriesIsZero) {
  SpeedSeries s{50, 3, std::vector<double>(150, 42.0)};
  const std::vector<std::size_t> h{1, 3};
  const MetricsReport r = baseline_persistence(s, make_windows(0, 50, 6, 3), h, 5.0);
  for (const auto& row : r.horizons) {
    EXPECT_EQ(row.metrics.mae, 0.0);
    EXPECT_EQ(row.metrics.rmse, 0.0);
    EXPECT_EQ(row.metrics.mape, 0.0);
  }
}

TEST(Persistence, RampErrorIsHorizonTimesSlope) {
  const SpeedSeries s = ramp(80, 2, 0.5);
  const std::vector<std::size_t> h{1, 4, 7};
  const MetricsReport r = baseline_persistence(s, make_windows(0, 80, 12, 7), h, 5.0);
  ASSERT_EQ(r.horizons.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.horizons[i].metrics.mae, 0.5 * static_cast<double>(h[i]));
    EXPECT_EQ(r.horizons[i].horizon_minutes, 5.0 * static_cast<double>(h[i]));
  }
}

TEST(Evaluate, MemorizedToyIsNearPerfectAndPure) {
  SyntheticSpec spec;
  spec.n_nodes = 3;
  spec.n_steps = 240;
  spec.period_steps = 24;
  spec.amplitude = 2.0;
  spec.noise_std = 0.0;
  const Dataset ds = testing::synthetic_dataset(spec);
  TrainConfig c = testing::toy_config();
  c.loss_weights.spatial = 0.0;
  c.loss_weights.temporal = 0.0;
  c.augment.mask_ratio = 0.0;
  c.learning_rate = 0.01;
  c.epochs = 60;
  const TrainResult r = train(ds, c);
  const MetricsReport test = evaluate(r.best, ds, r.splits.test, c.horizons);
  EXPECT_LT(test.mean_mae(), 0.1);
  const MetricsReport again = evaluate(r.best, ds, r.splits.test, c.horizons);
  for (std::size_t i = 0; i < test.horizons.size(); ++i) {
    EXPECT_EQ(test.horizons[i].metrics.mae, again.horizons[i].metrics.mae);
  }
  const std::vector<std::size_t> too_far{4};
  EXPECT_THROW(evaluate(r.best, ds, r.splits.test, too_far), ConfigError);
}

}  // namespace
}  // namespace stssl
