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
#include "stssl/model.hpp"

#include "stssl/errors.hpp"
#include "stssl/ops.hpp"
#include "stssl/ssl.hpp"

namespace stssl {

ParameterStore init_model_parameters(const TrainConfig& config) {
  config.validate();
  ParameterStore store;
  Rng rng(derive_seed(config.seed, 0x1417));
  const std::size_t d = config.encoder.d_model;
  init_encoder_parameters(store, config.encoder, config.input_window, rng);
  store.add("augment.w0", xavier_uniform({d}, d, 1, rng));
  init_ssl_parameters(store, config.ssl, d, rng);
  const std::size_t hidden = config.head_width();
  const std::size_t out = config.max_horizon();
  store.add("head.fc1.weight", xavier_uniform({d, hidden}, d, hidden, rng));
  store.add("head.fc1.bias", Tensor::zeros({hidden}));
  store.add("head.fc2.weight", xavier_uniform({hidden, out}, hidden, out, rng));
  store.add("head.fc2.bias", Tensor::zeros({out}));
  return store;
}

Tensor pool_time(const Tensor& x_st) {
  if (x_st.rank() != 4) throw DimensionError("pool_time expects [B, T, N, d]");
  return mean(x_st, 1);
}

Tensor prediction_head(const ParameterStore& store, const Tensor& pooled) {
  Tensor h = add(matmul(pooled, store.get("head.fc1.weight")), store.get("head.fc1.bias"));
  h = relu(h);
  return add(matmul(h, store.get("head.fc2.weight")), store.get("head.fc2.bias"));
}

Tensor prediction_loss(const Tensor& y, const Tensor& y_hat) {
  if (y.shape() != y_hat.shape()) {
    throw DimensionError("prediction_loss: target " + shape_to_string(y.shape()) + " vs prediction " +
                         shape_to_string(y_hat.shape()));
  }
  return mean(abs(sub(y_hat, y)));
}

Tensor total_loss(const LossTerms& terms, const LossWeights& weights) {
  Tensor total;
  auto accumulate = [&total](const Tensor& term, double weight) {
    if (weight == 0.0 || !term.defined()) return;
    const Tensor scaled = weight == 1.0 ? term : scale(term, weight);
    total = total.defined() ? add(total, scaled) : scaled;
  };
  accumulate(terms.prediction, weights.prediction);
  accumulate(terms.spatial, weights.spatial);
  accumulate(terms.temporal, weights.temporal);
  if (!total.defined()) total = Tensor::scalar(0.0);
  return total;
}

TrainingForward training_forward(const ParameterStore& store, const TrainConfig& config,
                                 const TrainingInputs& inputs) {
  if (inputs.basis == nullptr) throw ContractError("training_forward needs the graph basis");
  TrainingForward out;
  out.original = encode(store, config.encoder, inputs.x, *inputs.basis);
  const Tensor pooled = pool_time(out.original.x_st);
  out.prediction = prediction_head(store, pooled);
  out.terms.prediction = prediction_loss(inputs.y, out.prediction);

  const bool use_ssl = config.loss_weights.spatial > 0.0 || config.loss_weights.temporal > 0.0;
  if (use_ssl) {
    if (inputs.basis_aug == nullptr || !inputs.x_aug.defined()) {
      throw ContractError("SSL losses need the augmented view");
    }
    out.augmented = encode(store, config.encoder, inputs.x_aug, *inputs.basis_aug);
    if (config.loss_weights.spatial > 0.0) {
      const Tensor& prototypes = store.get("ssl.prototypes");
      out.spatial_targets = inputs.spatial_targets.defined()
                                ? inputs.spatial_targets
                                : cluster_targets(pool_time(out.augmented.x_st), prototypes, config.ssl.temperature);
      out.terms.spatial =
          spatial_ssl_loss_from_targets(pooled, out.spatial_targets, prototypes, config.ssl.temperature);
    }
    if (config.loss_weights.temporal > 0.0) {
      const Tensor fused = fuse_embeddings(out.original.x_st, out.augmented.x_st, store.get("ssl.w1"),
                                           store.get("ssl.w2"));
      out.terms.temporal = temporal_ssl_loss(fused, temporal_summary(fused), store.get("ssl.w3"),
                                             inputs.negative_steps);
    }
  }
  out.loss = total_loss(out.terms, config.loss_weights);
  return out;
}

Tensor predict(const ParameterStore& store, const TrainConfig& config, const Tensor& x,
               const std::vector<Tensor>& basis) {
  NoGradGuard no_grad;
  const EncoderOutput enc = encode(store, config.encoder, x, basis);
  return prediction_head(store, pool_time(enc.x_st));
}

}  // namespace stssl
