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
#include "stssl/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stssl/errors.hpp"
#include "stssl/ops.hpp"

namespace stssl {

void AugmentConfig::validate() const {
  if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) throw ConfigError("mask_ratio must lie in [0, 1]");
  if (!(edge_removal_ratio >= 0.0 && edge_removal_ratio <= 1.0)) {
    throw ConfigError("edge_removal_ratio must lie in [0, 1]");
  }
  if (!(edge_addition_fraction >= 0.0)) throw ConfigError("edge_addition_fraction must be nonnegative");
}

RegionSummaries region_summaries(const Tensor& x_temporal, const Tensor& w0) {
  if (x_temporal.rank() != 3 && x_temporal.rank() != 4) {
    throw DimensionError("region_summaries expects [T, N, d] or [B, T, N, d], got " +
                         shape_to_string(x_temporal.shape()));
  }
  const std::size_t rank = x_temporal.rank();
  const std::size_t d = x_temporal.dim(rank - 1);
  if (w0.numel() != d) throw DimensionError("w0 length does not match embedding width");
  const std::size_t time_axis = rank - 3;
  const Tensor scores = sum(mul(x_temporal, reshape(w0, {d})), rank - 1);
  RegionSummaries out;
  out.u = softmax(scores, time_axis);
  Shape u_shape = out.u.shape();
  u_shape.push_back(1);
  out.r = sum(mul(x_temporal, reshape(out.u, u_shape)), time_axis);
  return out;
}

Eigen::MatrixXd heterogeneity_matrix(const Eigen::MatrixXd& r) {
  const Eigen::Index n = r.rows();
  Eigen::VectorXd norms = r.rowwise().norm();
  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = m; k < n; ++k) {
      if (norms(m) == 0.0 || norms(k) == 0.0) continue;
      const double value = std::clamp(r.row(m).dot(r.row(k)) / (norms(m) * norms(k)), -1.0, 1.0);
      eta(m, k) = value;
      eta(k, m) = value;
    }
  }
  return eta;
}

HeterogeneityScores score_heterogeneity(const Tensor& x_temporal, const Tensor& w0) {
  NoGradGuard no_grad;
  const RegionSummaries s = region_summaries(x_temporal.detach(), w0.detach());
  const bool batched = x_temporal.rank() == 4;
  const std::size_t batch = batched ? x_temporal.dim(0) : 1;
  const std::size_t steps = x_temporal.dim(batched ? 1 : 0);
  const std::size_t nodes = x_temporal.dim(batched ? 2 : 1);
  const std::size_t d = x_temporal.dim(batched ? 3 : 2);

  HeterogeneityScores out;
  out.u = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(nodes));
  out.r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(d));
  const auto u = s.u.data();
  const auto r = s.r.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t n = 0; n < nodes; ++n) {
        out.u(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(n)) += u[(b * steps + t) * nodes + n];
      }
    }
    for (std::size_t n = 0; n < nodes; ++n) {
      for (std::size_t c = 0; c < d; ++c) {
        out.r(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c)) += r[(b * nodes + n) * d + c];
      }
    }
  }
  out.u /= static_cast<double>(batch);
  out.r /= static_cast<double>(batch);
  out.eta = heterogeneity_matrix(out.r);
  return out;
}

Eigen::MatrixXd mask_probabilities(const Eigen::MatrixXd& u, double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError("mask ratio must lie in [0, 1]");
  Eigen::MatrixXd p(u.rows(), u.cols());
  for (Eigen::Index n = 0; n < u.cols(); ++n) {
    const double peak = u.col(n).maxCoeff();
    for (Eigen::Index t = 0; t < u.rows(); ++t) {
      const double scaled = peak > 0.0 ? std::clamp(u(t, n) / peak, 0.0, 1.0) : 1.0;
      p(t, n) = ratio * (1.0 - scaled);
    }
  }
  return p;
}

std::size_t MaskedSequence::masked_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

MaskedSequence mask_sequence(const Tensor& x_raw, const Eigen::MatrixXd& u, double ratio, Rng& rng) {
  const Eigen::MatrixXd p = mask_probabilities(u, ratio);
  const bool batched = x_raw.rank() == 4;
  if ((x_raw.rank() != 3 && !batched) || x_raw.shape().back() != 1) {
    throw DimensionError("mask_sequence expects [T, N, 1] or [B, T, N, 1], got " + shape_to_string(x_raw.shape()));
  }
  const std::size_t steps = x_raw.dim(batched ? 1 : 0);
  const std::size_t nodes = x_raw.dim(batched ? 2 : 1);
  if (static_cast<std::size_t>(u.rows()) != steps || static_cast<std::size_t>(u.cols()) != nodes) {
    throw DimensionError("mask weights are " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) +
                         " but the sequence is " + std::to_string(steps) + "x" + std::to_string(nodes));
  }
  MaskedSequence out;
  std::vector<double> values(x_raw.data().begin(), x_raw.data().end());
  out.mask.assign(values.size(), 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t n = i % nodes;
    const std::size_t t = (i / nodes) % steps;
    const double prob = p(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(n));
    if (unit(rng) < prob) {
      out.mask[i] = 1;
      values[i] = 0.0;
    }
  }
  out.x_masked = Tensor::from(x_raw.shape(), std::move(values));
  return out;
}

GraphPerturbation perturb_graph(const Eigen::MatrixXd& adjacency, const Eigen::MatrixXd& eta,
                                const AugmentConfig& config, Rng& rng) {
  config.validate();
  const Eigen::Index n = adjacency.rows();
  if (adjacency.cols() != n || eta.rows() != n || eta.cols() != n) {
    throw DimensionError("adjacency and heterogeneity matrices must both be " + std::to_string(n) + "x" +
                         std::to_string(n));
  }
  GraphPerturbation out;
  out.adjacency = adjacency;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<NodePair> existing;
  std::vector<NodePair> absent;
  double weight_total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const NodePair pair{static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
      if (adjacency(i, j) > 0.0) {
        existing.push_back(pair);
        weight_total += adjacency(i, j);
      } else {
        absent.push_back(pair);
      }
    }
  }
  const double added_weight = existing.empty() ? 1.0 : weight_total / static_cast<double>(existing.size());

  for (const auto& [i, j] : existing) {
    const double similarity = std::clamp(eta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 0.0, 1.0);
    const double p_remove = config.edge_removal_ratio * (1.0 - similarity);
    if (unit(rng) < p_remove) {
      out.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
      out.adjacency(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 0.0;
      out.edges_removed.push_back({i, j});
    }
  }

  const auto budget = static_cast<std::size_t>(
      std::ceil(config.edge_addition_fraction * static_cast<double>(existing.size()) - 1e-12));
  auto eta_of = [&](const NodePair& p) {
    return eta(static_cast<Eigen::Index>(p.first), static_cast<Eigen::Index>(p.second));
  };
  // Highest similarity first; ties keep lexicographic pair order.
  std::stable_sort(absent.begin(), absent.end(),
                   [&](const NodePair& a, const NodePair& b) { return eta_of(a) > eta_of(b); });
  const std::size_t candidates = std::min(budget, absent.size());
  for (std::size_t c = 0; c < candidates; ++c) {
    const NodePair& pair = absent[c];
    const double p_add = std::clamp(eta_of(pair), 0.0, 1.0);
    if (unit(rng) < p_add) {
      out.adjacency(static_cast<Eigen::Index>(pair.first), static_cast<Eigen::Index>(pair.second)) = added_weight;
      out.adjacency(static_cast<Eigen::Index>(pair.second), static_cast<Eigen::Index>(pair.first)) = added_weight;
      out.edges_added.push_back(pair);
    }
  }
  out.adjacency.diagonal().setZero();
  return out;
}

AugmentedView augment(const Tensor& x_raw, const Eigen::MatrixXd& adjacency, const HeterogeneityScores& scores,
                      const AugmentConfig& config, Rng& rng) {
  config.validate();
  MaskedSequence masked = mask_sequence(x_raw, scores.u, config.mask_ratio, rng);
  GraphPerturbation graph = perturb_graph(adjacency, scores.eta, config, rng);
  AugmentedView view;
  view.x_masked = std::move(masked.x_masked);
  view.mask_seq = std::move(masked.mask);
  view.adjacency_aug = std::move(graph.adjacency);
  view.edges_removed = std::move(graph.edges_removed);
  view.edges_added = std::move(graph.edges_added);
  return view;
}

}  // namespace stssl
