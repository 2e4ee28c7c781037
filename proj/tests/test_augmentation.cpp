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

#include "stssl/augmentation.hpp"
#include "stssl/errors.hpp"
#include "stssl/gradcheck.hpp"
#include "stssl/ops.hpp"
#include "test_util.hpp"

namespace stssl {
namespace {

using testing::random_tensor;

Eigen::MatrixXd ring_adjacency(Eigen::Index n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) a(i, (i + 1) % n) = a((i + 1) % n, i) = 0.8;
  return a;
}

// Exactly `count` edges taken in lexicographic order from a complete graph on n nodes.
Eigen::MatrixXd dense_graph(Eigen::Index n, std::size_t count) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  std::size_t added = 0;
  for (Eigen::Index i = 0; i < n && added < count; ++i) {
    for (Eigen::Index j = i + 1; j < n && added < count; ++j, ++added) a(i, j) = a(j, i) = 1.0;
  }
  return a;
}

TEST(RegionSummaries, ZeroWeightGivesUniformTimeMean) {
  Rng rng(1);
  const Tensor x = random_tensor({4, 3, 5}, rng);
  const RegionSummaries s = region_summaries(x, Tensor::zeros({5}));
  for (double u : s.u.data()) EXPECT_NEAR(u, 0.25, 1e-15);
  const Tensor time_mean = mean(x, 0);
  EXPECT_LE(testing::max_abs_diff(s.r.data(), time_mean.data()), 1e-14);
}

TEST(RegionSummaries, SingleStep) {
  Rng rng(2);
  const Tensor x = random_tensor({1, 3, 4}, rng);
  const RegionSummaries s = region_summaries(x, random_tensor({4}, rng));
  for (double u : s.u.data()) EXPECT_EQ(u, 1.0);
  EXPECT_EQ(std::vector<double>(s.r.data().begin(), s.r.data().end()),
            std::vector<double>(x.data().begin(), x.data().end()));
}

TEST(RegionSummaries, ConvexCombinationOfSteps) {
  Rng rng(3);
  const std::size_t t = 6, n = 4, d = 5;
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = random_tensor({t, n, d}, rng, -3, 3);
    const RegionSummaries s = region_summaries(x, random_tensor({d}, rng, -2, 2));
    for (std::size_t node = 0; node < n; ++node) {
      double col = 0.0;
      for (std::size_t step = 0; step < t; ++step) col += s.u.data()[step * n + node];
      EXPECT_NEAR(col, 1.0, 1e-12);
      for (std::size_t c = 0; c < d; ++c) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t step = 0; step < t; ++step) {
          lo = std::min(lo, x.data()[(step * n + node) * d + c]);
          hi = std::max(hi, x.data()[(step * n + node) * d + c]);
        }
        const double r = s.r.data()[node * d + c];
        EXPECT_GE(r, lo - 1e-12);
        EXPECT_LE(r, hi + 1e-12);
      }
    }
  }
}

TEST(RegionSummaries, DifferentiableInWeightAndEmbedding) {
  Rng rng(4);
  ParameterStore store;
  store.add("x", random_tensor({2, 3, 2, 4}, rng));
  store.add("w0", random_tensor({4}, rng));
  const Tensor w = random_tensor({2, 2, 4}, rng);
  auto f = [&]() { return sum(mul(region_summaries(store.get("x"), store.get("w0")).r, w)); };
  EXPECT_LE(finite_difference_check(f, store), 1e-6);
}

TEST(Heterogeneity, CosineExamples) {
  Eigen::MatrixXd r(4, 3);
  r << 1, 2, 3,  //
      1, 2, 3,   //
      -1, -2, -3,  //
      3, 0, -1;
  const Eigen::MatrixXd eta = heterogeneity_matrix(r);
  EXPECT_NEAR(eta(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(eta(0, 2), -1.0, 1e-12);
  EXPECT_NEAR(eta(0, 3), 0.0, 1e-12);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(eta(i, i), 1.0, 1e-12);
  EXPECT_EQ(eta, eta.transpose());
}

TEST(Heterogeneity, ZeroRowIsZeroAgainstEverything) {
  Eigen::MatrixXd r(2, 2);
  r << 0, 0, 1, 1;
  const Eigen::MatrixXd eta = heterogeneity_matrix(r);
  EXPECT_EQ(eta(0, 0), 0.0);
  EXPECT_EQ(eta(0, 1), 0.0);
}

TEST(Heterogeneity, ScoresSatisfyInvariants) {
  Rng rng(5);
  const HeterogeneityScores s = score_heterogeneity(random_tensor({3, 6, 5, 4}, rng), random_tensor({4}, rng));
  ASSERT_EQ(s.u.rows(), 6);
  ASSERT_EQ(s.u.cols(), 5);
  for (Eigen::Index n = 0; n < 5; ++n) EXPECT_NEAR(s.u.col(n).sum(), 1.0, 1e-12);
  EXPECT_EQ(s.eta, s.eta.transpose());
  EXPECT_LE(s.eta.maxCoeff(), 1.0);
  EXPECT_GE(s.eta.minCoeff(), -1.0);
  for (Eigen::Index n = 0; n < 5; ++n) EXPECT_NEAR(s.eta(n, n), 1.0, 1e-12);
}

TEST(MaskSequence, ZeroRatioLeavesInputUntouched) {
  Rng rng(6);
  const Tensor x = random_tensor({2, 4, 3, 1}, rng);
  const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(4, 3, 0.25) + Eigen::MatrixXd::Identity(4, 3) * 0.1;
  const MaskedSequence m = mask_sequence(x, u, 0.0, rng);
  EXPECT_EQ(m.masked_count(), 0u);
  EXPECT_EQ(std::vector<double>(m.x_masked.data().begin(), m.x_masked.data().end()),
            std::vector<double>(x.data().begin(), x.data().end()));
}

TEST(MaskSequence, PeakStepIsNeverMasked) {
  Rng rng(7);
  Eigen::MatrixXd u(3, 2);
  u << 0.7, 0.1, 0.2, 0.8, 0.1, 0.1;
  const Tensor x = Tensor::full({400, 3, 2, 1}, 1.0);
  const MaskedSequence m = mask_sequence(x, u, 1.0, rng);
  for (std::size_t b = 0; b < 400; ++b) {
    EXPECT_EQ(m.mask[(b * 3 + 0) * 2 + 0], 0);
    EXPECT_EQ(m.mask[(b * 3 + 1) * 2 + 1], 0);
  }
  EXPECT_GT(m.masked_count(), 0u);
}

TEST(MaskSequence, BinomialRate) {
  // u = [0.5, 0.25, 0.25] per node: rescaled [1, 0.5, 0.5], so with rho = 0.4
  // the last two steps are masked with probability 0.2.
  const std::size_t nodes = 5000;
  Eigen::MatrixXd u(3, static_cast<Eigen::Index>(nodes));
  u.row(0).setConstant(0.5);
  u.row(1).setConstant(0.25);
  u.row(2).setConstant(0.25);
  const Eigen::MatrixXd p = mask_probabilities(u, 0.4);
  EXPECT_DOUBLE_EQ(p(1, 0), 0.2);
  EXPECT_EQ(p(0, 0), 0.0);
  Rng rng(8);
  const MaskedSequence m = mask_sequence(Tensor::full({1, 3, nodes, 1}, 2.0), u, 0.4, rng);
  std::size_t hits = 0;
  for (std::size_t i = nodes; i < 3 * nodes; ++i) hits += m.mask[i];
  const double rate = static_cast<double>(hits) / 10000.0;
  EXPECT_NEAR(rate, 0.2, 3.0 * std::sqrt(0.2 * 0.8 / 10000.0));
}

TEST(MaskSequence, MaskedEntriesZeroOthersUnchanged) {
  Rng rng(9);
  const Tensor x = random_tensor({4, 5, 6, 1}, rng, 1, 2);
  Eigen::MatrixXd u = Eigen::MatrixXd::Random(5, 6).cwiseAbs();
  for (Eigen::Index n = 0; n < 6; ++n) u.col(n) /= u.col(n).sum();
  const MaskedSequence m = mask_sequence(x, u, 0.8, rng);
  EXPECT_GT(m.masked_count(), 0u);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    if (m.mask[i]) {
      EXPECT_EQ(m.x_masked.data()[i], 0.0);
    } else {
      EXPECT_EQ(m.x_masked.data()[i], x.data()[i]);
    }
  }
}

TEST(MaskSequence, RatioOutsideUnitIntervalIsConfigError) {
  Rng rng(10);
  const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(2, 2, 0.5);
  EXPECT_THROW(mask_sequence(Tensor::zeros({2, 2, 1}), u, 1.5, rng), ConfigError);
  EXPECT_THROW(mask_sequence(Tensor::zeros({2, 2, 1}), u, -0.1, rng), ConfigError);
}

TEST(MaskSequence, ProbabilityNonIncreasingInWeight) {
  Eigen::MatrixXd u(5, 1);
  u << 0.05, 0.1, 0.2, 0.3, 0.35;
  const Eigen::MatrixXd p = mask_probabilities(u, 0.3);
  for (Eigen::Index t = 1; t < 5; ++t) EXPECT_LE(p(t, 0), p(t - 1, 0));
}

TEST(PerturbGraph, FullSimilarityNeverRemoves) {
  Rng rng(11);
  const Eigen::MatrixXd a = ring_adjacency(12);
  AugmentConfig c;
  c.edge_removal_ratio = 1.0;
  c.edge_addition_fraction = 1.0;
  const GraphPerturbation g = perturb_graph(a, Eigen::MatrixXd::Ones(12, 12), c, rng);
  EXPECT_TRUE(g.edges_removed.empty());
  for (Eigen::Index i = 0; i < 12; ++i) {
    for (Eigen::Index j = 0; j < 12; ++j) {
      if (a(i, j) > 0) {
        EXPECT_EQ(g.adjacency(i, j), a(i, j));
      }
    }
  }
}

TEST(PerturbGraph, ZeroSimilarityNeverAdds) {
  Rng rng(12);
  AugmentConfig c;
  c.edge_addition_fraction = 1.0;
  const GraphPerturbation g = perturb_graph(ring_adjacency(10), Eigen::MatrixXd::Zero(10, 10), c, rng);
  EXPECT_TRUE(g.edges_added.empty());
}

TEST(PerturbGraph, BinomialRemovalCount) {
  const Eigen::MatrixXd a = dense_graph(21, 200);
  AugmentConfig c;
  c.edge_removal_ratio = 1.0;
  c.edge_addition_fraction = 0.0;
  Rng rng(13);
  const GraphPerturbation g = perturb_graph(a, Eigen::MatrixXd::Constant(21, 21, 0.5), c, rng);
  EXPECT_NEAR(static_cast<double>(g.edges_removed.size()), 100.0, 3.0 * std::sqrt(200.0 * 0.25));
}

TEST(PerturbGraph, AddedEdgesUseMeanWeightWithinBudget) {
  Eigen::MatrixXd a = ring_adjacency(8);
  a(0, 1) = a(1, 0) = 0.4;
  const double mean_weight = (0.4 + 7 * 0.8) / 8.0;
  AugmentConfig c;
  c.edge_removal_ratio = 0.0;
  c.edge_addition_fraction = 0.25;
  Rng rng(14);
  const GraphPerturbation g = perturb_graph(a, Eigen::MatrixXd::Ones(8, 8), c, rng);
  EXPECT_EQ(g.edges_added.size(), 2u);  // ceil(0.25 * 8), each with probability 1
  for (const auto& [i, j] : g.edges_added) {
    EXPECT_EQ(a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 0.0);
    EXPECT_DOUBLE_EQ(g.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), mean_weight);
  }
}

TEST(PerturbGraph, SymmetricZeroDiagonalNonnegative) {
  Rng rng(15);
  AugmentConfig c;
  c.edge_removal_ratio = 0.7;
  c.edge_addition_fraction = 0.5;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd a = dense_graph(9, 15);
    Eigen::MatrixXd r = Eigen::MatrixXd::Random(9, 4);
    const GraphPerturbation g = perturb_graph(a, heterogeneity_matrix(r), c, rng);
    EXPECT_EQ(g.adjacency, g.adjacency.transpose());
    EXPECT_EQ(g.adjacency.diagonal().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GE(g.adjacency.minCoeff(), 0.0);
  }
}

TEST(Augment, DeterministicUnderSeed) {
  Rng data_rng(16);
  const Tensor x = random_tensor({2, 4, 6, 1}, data_rng);
  const HeterogeneityScores s = score_heterogeneity(random_tensor({2, 4, 6, 3}, data_rng), random_tensor({3}, data_rng));
  AugmentConfig c;
  c.mask_ratio = 0.5;
  c.edge_removal_ratio = 0.5;
  c.edge_addition_fraction = 0.5;
  Rng r1(99), r2(99);
  const AugmentedView v1 = augment(x, ring_adjacency(6), s, c, r1);
  const AugmentedView v2 = augment(x, ring_adjacency(6), s, c, r2);
  EXPECT_EQ(v1.mask_seq, v2.mask_seq);
  EXPECT_EQ(v1.edges_removed, v2.edges_removed);
  EXPECT_EQ(v1.edges_added, v2.edges_added);
  EXPECT_EQ(v1.adjacency_aug, v2.adjacency_aug);
}

TEST(Augment, OffSwitchReproducesInput) {
  Rng data_rng(17);
  const Tensor x = random_tensor({2, 4, 6, 1}, data_rng);
  const HeterogeneityScores s = score_heterogeneity(random_tensor({2, 4, 6, 3}, data_rng), random_tensor({3}, data_rng));
  AugmentConfig c;
  c.mask_ratio = 0.0;
  c.edge_removal_ratio = 0.0;
  c.edge_addition_fraction = 0.0;
  Rng rng(3);
  const AugmentedView v = augment(x, ring_adjacency(6), s, c, rng);
  EXPECT_EQ(std::vector<double>(v.x_masked.data().begin(), v.x_masked.data().end()),
            std::vector<double>(x.data().begin(), x.data().end()));
  EXPECT_EQ(v.adjacency_aug, ring_adjacency(6));
  EXPECT_TRUE(v.edges_removed.empty() && v.edges_added.empty());
}

}  // namespace
}  // namespace stssl
