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
#ifndef STSSL_MODEL_HPP
#define STSSL_MODEL_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "stssl/config.hpp"
#include "stssl/encoder.hpp"
#include "stssl/parameters.hpp"
#include "stssl/tensor.hpp"

namespace stssl {

// Registers encoder, augmentation-scoring (w0), SSL and head parameters.
// Initialization order is lexicographic by name within each group and driven
// by one generator seeded from config.seed.
ParameterStore init_model_parameters(const TrainConfig& config);

// Mean over the time axis: [B, T, N, d] -> [B, N, d].
Tensor pool_time(const Tensor& x_st);

// Two affine layers with a ReLU between: [..., d] -> [..., H].
Tensor prediction_head(const ParameterStore& store, const Tensor& pooled);

// Mean absolute error over every entry.
Tensor prediction_loss(const Tensor& y, const Tensor& y_hat);

struct LossTerms {
  Tensor prediction;
  Tensor spatial;
  Tensor temporal;
};

// α_p·L_p + α_s·L_s + α_t·L_t. Terms with zero weight are skipped entirely.
Tensor total_loss(const LossTerms& terms, const LossWeights& weights);

/// Inputs to one training step: the batch, its augmented input and the
/// Chebyshev bases of the original and augmented graphs.
struct TrainingInputs {
  Tensor x;
  Tensor x_aug;
  Tensor y;
  const std::vector<Tensor>* basis = nullptr;
  const std::vector<Tensor>* basis_aug = nullptr;
  std::vector<std::size_t> negative_steps;
  // When defined, replaces the cluster targets computed from the augmented view.
  Tensor spatial_targets;
};

struct TrainingForward {
  EncoderOutput original;
  EncoderOutput augmented;
  Tensor prediction;
  LossTerms terms;
  Tensor spatial_targets;
  Tensor loss;
};

TrainingForward training_forward(const ParameterStore& store, const TrainConfig& config,
                                 const TrainingInputs& inputs);

// Inference on the original view only; returns [B, N, H] in normalized units.
Tensor predict(const ParameterStore& store, const TrainConfig& config, const Tensor& x,
               const std::vector<Tensor>& basis);

}  // namespace stssl

#endif  // STSSL_MODEL_HPP
