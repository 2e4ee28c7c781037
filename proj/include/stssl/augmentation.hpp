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
#ifndef STSSL_AUGMENTATION_HPP
#define STSSL_AUGMENTATION_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "stssl/init.hpp"
#include "stssl/tensor.hpp"

namespace stssl {

struct AugmentConfig {
  // Global base masking ratio ρ for the sequence view.
  double mask_ratio = 0.1;
  // Scales the edge removal probability 1 - clamp(η, 0, 1).
  double edge_removal_ratio = 0.1;
  // Candidate additions: the top ⌈fraction · |E|⌉ non-adjacent pairs by η.
  double edge_addition_fraction = 0.05;

  void validate() const;
};

using NodePair = std::pair<std::size_t, std::size_t>;

/// Time-attention weights u (softmax over time of ⟨x, w0⟩) and the weighted
/// region summaries r = Σ_τ u_τ x_τ. Both remain differentiable.
/// x_temporal is [T, N, d] or [B, T, N, d]; u comes back as [..., T, N] and r as [..., N, d].
struct RegionSummaries {
  Tensor u;
  Tensor r;
};
RegionSummaries region_summaries(const Tensor& x_temporal, const Tensor& w0);

/// Detached scores that drive augmentation decisions.
struct HeterogeneityScores {
  Eigen::MatrixXd u;    // T × N, each column sums to 1
  Eigen::MatrixXd r;    // N × d
  Eigen::MatrixXd eta;  // N × N cosine similarity
};

// Cosine similarity of rows; rows with zero norm score 0 against everything.
Eigen::MatrixXd heterogeneity_matrix(const Eigen::MatrixXd& r);

// Batch inputs are averaged over the batch before η is formed.
HeterogeneityScores score_heterogeneity(const Tensor& x_temporal, const Tensor& w0);

// p(τ, n) = ρ · (1 - u(τ, n) / max_τ' u(τ', n)).
Eigen::MatrixXd mask_probabilities(const Eigen::MatrixXd& u, double ratio);

struct MaskedSequence {
  Tensor x_masked;
  // One flag per (sample, step, node), row-major; 1 = masked.
  std::vector<std::uint8_t> mask;

  std::size_t masked_count() const;
};

// x_raw is [T, N, 1] or [B, T, N, 1]. Masked entries become exactly 0; the
// mask is a constant, so no gradient reaches u.
MaskedSequence mask_sequence(const Tensor& x_raw, const Eigen::MatrixXd& u, double ratio, Rng& rng);

struct GraphPerturbation {
  Eigen::MatrixXd adjacency;
  std::vector<NodePair> edges_removed;
  std::vector<NodePair> edges_added;
};

GraphPerturbation perturb_graph(const Eigen::MatrixXd& adjacency, const Eigen::MatrixXd& eta,
                                const AugmentConfig& config, Rng& rng);

struct AugmentedView {
  Tensor x_masked;
  std::vector<std::uint8_t> mask_seq;
  Eigen::MatrixXd adjacency_aug;
  std::vector<NodePair> edges_removed;
  std::vector<NodePair> edges_added;
};

AugmentedView augment(const Tensor& x_raw, const Eigen::MatrixXd& adjacency, const HeterogeneityScores& scores,
                      const AugmentConfig& config, Rng& rng);

}  // namespace stssl

#endif  // STSSL_AUGMENTATION_HPP
