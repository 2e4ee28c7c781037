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
#include "stssl/ssl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stssl/errors.hpp"
#include "stssl/ops.hpp"

namespace stssl {

void SslConfig::validate() const {
  if (n_clusters == 0) throw ConfigError("n_clusters must be at least 1");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
}

void init_ssl_parameters(ParameterStore& store, const SslConfig& config, std::size_t d_model, Rng& rng) {
  config.validate();
  Tensor prototypes = xavier_uniform({config.n_clusters, d_model}, d_model, config.n_clusters, rng);
  renormalize_prototypes(prototypes);
  store.add("ssl.prototypes", prototypes);
  store.add("ssl.w1", xavier_uniform({d_model}, d_model, d_model, rng));
  store.add("ssl.w2", xavier_uniform({d_model}, d_model, d_model, rng));
  store.add("ssl.w3", xavier_uniform({d_model, d_model}, d_model, d_model, rng));
}

void renormalize_prototypes(Tensor& prototypes) {
  const std::size_t d = prototypes.dim(1);
  auto values = prototypes.mutable_data();
  for (std::size_t k = 0; k < prototypes.dim(0); ++k) {
    double norm = 0.0;
    for (std::size_t c = 0; c < d; ++c) norm += values[k * d + c] * values[k * d + c];
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (std::size_t c = 0; c < d; ++c) values[k * d + c] /= norm;
  }
}

Tensor cluster_targets(const Tensor& x_st_aug, const Tensor& prototypes, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  const Tensor scores = matmul(x_st_aug.detach(), transpose(prototypes.detach()));
  return softmax(scale(scores, 1.0 / temperature), scores.rank() - 1).detach();
}

Tensor spatial_ssl_loss(const Tensor& x_st, const Tensor& x_st_aug, const Tensor& prototypes, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (x_st.shape() != x_st_aug.shape() || x_st.rank() < 2) {
    throw DimensionError("spatial_ssl_loss: embeddings " + shape_to_string(x_st.shape()) + " and " +
                         shape_to_string(x_st_aug.shape()) + " must match and be at least [N, d]");
  }
  if (prototypes.rank() != 2 || prototypes.dim(1) != x_st.shape().back()) {
    throw DimensionError("prototypes " + shape_to_string(prototypes.shape()) + " do not match embedding width");
  }
  return spatial_ssl_loss_from_targets(x_st, cluster_targets(x_st_aug, prototypes, temperature), prototypes,
                                       temperature);
}

Tensor spatial_ssl_loss_from_targets(const Tensor& x_st, const Tensor& targets, const Tensor& prototypes,
                                     double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (prototypes.rank() != 2 || x_st.rank() < 2 || prototypes.dim(1) != x_st.shape().back()) {
    throw DimensionError("prototypes " + shape_to_string(prototypes.shape()) + " do not match embedding width");
  }
  std::vector<std::size_t> expected(x_st.shape().begin(), x_st.shape().end() - 1);
  expected.push_back(prototypes.dim(0));
  if (targets.shape() != expected) {
    throw DimensionError("cluster targets " + shape_to_string(targets.shape()) + ", expected " +
                         shape_to_string(expected));
  }
  const Tensor target = targets.detach();
  const Tensor logits = scale(matmul(x_st, transpose(prototypes)), 1.0 / temperature);
  const Tensor log_pred = log_softmax(logits, logits.rank() - 1);
  const std::size_t samples = x_st.numel() / (x_st.dim(x_st.rank() - 2) * x_st.shape().back());
  return scale(sum(mul(target, log_pred)), -1.0 / static_cast<double>(samples));
}

Tensor fuse_embeddings(const Tensor& x_st, const Tensor& x_st_aug, const Tensor& w1, const Tensor& w2) {
  if (x_st.shape() != x_st_aug.shape()) {
    throw DimensionError("fuse_embeddings: " + shape_to_string(x_st.shape()) + " vs " +
                         shape_to_string(x_st_aug.shape()));
  }
  const std::size_t d = x_st.shape().back();
  if (w1.numel() != d || w2.numel() != d) throw DimensionError("fusion gates must have the embedding width");
  return add(mul(x_st, reshape(w1, {d})), mul(x_st_aug, reshape(w2, {d})));
}

Tensor temporal_summary(const Tensor& r_fused) {
  if (r_fused.rank() != 3 && r_fused.rank() != 4) {
    throw DimensionError("temporal_summary expects [T, N, d] or [B, T, N, d]");
  }
  return sigmoid(mean(r_fused, r_fused.rank() - 2));
}

std::vector<std::size_t> random_derangement(std::size_t n, Rng& rng) {
  if (n < 2) throw ContractError("a derangement needs at least two elements");
  std::vector<std::size_t> perm(n);
  while (true) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i);
      std::swap(perm[i], perm[pick(rng)]);
    }
    bool fixed_point = false;
    for (std::size_t i = 0; i < n && !fixed_point; ++i) fixed_point = perm[i] == i;
    if (!fixed_point) return perm;
  }
}

Tensor temporal_ssl_loss(const Tensor& r_fused, const Tensor& lambda, const Tensor& w3,
                         std::span<const std::size_t> negative_steps) {
  Tensor r = r_fused;
  Tensor lam = lambda;
  if (r.rank() == 3) {
    r = reshape(r, {1, r.dim(0), r.dim(1), r.dim(2)});
    lam = reshape(lam, {1, lam.dim(0), lam.dim(1)});
  }
  if (r.rank() != 4 || lam.rank() != 3 || lam.dim(0) != r.dim(0) || lam.dim(1) != r.dim(1) ||
      lam.dim(2) != r.dim(3)) {
    throw DimensionError("temporal_ssl_loss: r " + shape_to_string(r_fused.shape()) + " and summaries " +
                         shape_to_string(lambda.shape()) + " are inconsistent");
  }
  const std::size_t batch = r.dim(0);
  const std::size_t steps = r.dim(1);
  const std::size_t d = r.dim(3);
  if (steps < 2) throw ContractError("temporal_ssl_loss needs at least two time steps");
  if (negative_steps.size() != steps) throw DimensionError("negative step map must cover every time step");
  for (std::size_t t = 0; t < steps; ++t) {
    if (negative_steps[t] >= steps || negative_steps[t] == t) {
      throw ContractError("negative steps must be a derangement of the time axis");
    }
  }
  if (w3.rank() != 2 || w3.dim(0) != d || w3.dim(1) != d) throw DimensionError("w3 must be d x d");

  const Tensor projected = matmul(r, w3);
  const Tensor positive_summary = reshape(lam, {batch, steps, 1, d});
  const Tensor negative_summary = reshape(index_select(lam, 1, negative_steps), {batch, steps, 1, d});
  const Tensor positive_logit = sum(mul(projected, positive_summary), 3);
  const Tensor negative_logit = sum(mul(projected, negative_summary), 3);
  const Tensor total = add(log_sigmoid(positive_logit), log_sigmoid(neg(negative_logit)));
  return neg(mean(total));
}

Tensor temporal_ssl_loss(const Tensor& r_fused, const Tensor& lambda, const Tensor& w3, Rng& rng) {
  const std::size_t steps = r_fused.dim(r_fused.rank() - 3);
  if (steps < 2) throw ContractError("temporal_ssl_loss needs at least two time steps");
  const auto negatives = random_derangement(steps, rng);
  return temporal_ssl_loss(r_fused, lambda, w3, negatives);
}

}  // namespace stssl
