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
#ifndef STSSL_SSL_HPP
#define STSSL_SSL_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "stssl/init.hpp"
#include "stssl/parameters.hpp"
#include "stssl/tensor.hpp"

// Self-supervised objectives over the encoder's original and augmented
// embeddings: a prototype cluster-assignment loss across regions and a
// bilinear contrastive loss across time steps.
namespace stssl {

struct SslConfig {
  std::size_t n_clusters = 8;
  double temperature = 0.5;

  void validate() const;
};

// Registers "ssl.prototypes" (unit rows), "ssl.w1", "ssl.w2", "ssl.w3".
void init_ssl_parameters(ParameterStore& store, const SslConfig& config, std::size_t d_model, Rng& rng);

// Rescales every prototype row to unit Euclidean norm (zero rows are left alone).
void renormalize_prototypes(Tensor& prototypes);

/// Cross-entropy between the augmented view's cluster assignment (softmax of
/// prototype scores / temperature, detached) and the original view's
/// log-softmax assignment, summed over regions.
///
/// Inputs are [N, d] or [..., N, d]; leading axes are averaged so a batch
/// contributes the mean per-sample loss.
Tensor spatial_ssl_loss(const Tensor& x_st, const Tensor& x_st_aug, const Tensor& prototypes, double temperature);

// Softmax target assignment p̃ used above, [..., N, K].
Tensor cluster_targets(const Tensor& x_st_aug, const Tensor& prototypes, double temperature);

// Same loss with the target assignment supplied; targets are treated as constants.
Tensor spatial_ssl_loss_from_targets(const Tensor& x_st, const Tensor& targets, const Tensor& prototypes,
                                     double temperature);

// r = w1 ⊙ x + w2 ⊙ x̃ with gates broadcast over all positions.
Tensor fuse_embeddings(const Tensor& x_st, const Tensor& x_st_aug, const Tensor& w1, const Tensor& w2);

// Λ_t = sigmoid(mean over nodes of r_t); [T, N, d] -> [T, d], [B, T, N, d] -> [B, T, d].
Tensor temporal_summary(const Tensor& r_fused);

// Uniformly drawn permutation of 0..n-1 with no fixed points (n >= 2).
std::vector<std::size_t> random_derangement(std::size_t n, Rng& rng);

/// Mean over (sample, t, n) of
///   -[log g(r_{t,n}, Λ_t) + log(1 - g(r_{t,n}, Λ_{t'}))],  g(a, b) = sigmoid(aᵀ W b),
/// where t' = negative_steps[t]. Throws ContractError when T < 2.
Tensor temporal_ssl_loss(const Tensor& r_fused, const Tensor& lambda, const Tensor& w3,
                         std::span<const std::size_t> negative_steps);
Tensor temporal_ssl_loss(const Tensor& r_fused, const Tensor& lambda, const Tensor& w3, Rng& rng);

}  // namespace stssl

#endif  // STSSL_SSL_HPP
