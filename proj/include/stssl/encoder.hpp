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
#ifndef STSSL_ENCODER_HPP
#define STSSL_ENCODER_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "stssl/graph.hpp"
#include "stssl/init.hpp"
#include "stssl/parameters.hpp"
#include "stssl/tensor.hpp"

// Stacked spatial-temporal encoder. Activations are laid out as
// [batch, time, node, channel]; raw speed input has a single channel.
namespace stssl {

struct EncoderConfig {
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_layers = 2;
  std::size_t cheb_order = 3;
  std::size_t ffn_hidden = 256;
  bool positional_encoding = true;

  void validate() const;
};

struct EncoderActivations {
  Tensor x_in;
  Tensor x_temporal;
  Tensor x_spatial;
};

struct EncoderOutput {
  std::vector<EncoderActivations> layers;
  Tensor x_st;
};

// Attention maps captured during a forward pass, one per layer, each shaped
// [batch * node * head, time, time].
struct AttentionProbe {
  std::vector<Tensor> scores;
};

// Registers every encoder parameter under "encoder.*".
void init_encoder_parameters(ParameterStore& store, const EncoderConfig& config, std::size_t input_window, Rng& rng);

// Chebyshev matrices as constant tensors, ready for node_mix.
std::vector<Tensor> basis_tensors(const ChebyshevBasis& basis);

// Per-position affine lift of the speed channel plus optional position embedding.
Tensor input_projection(const ParameterStore& store, const EncoderConfig& config, const Tensor& x_raw);

// Multi-head self-attention over the time axis of each node, then a
// three-layer ReLU feed-forward network. Residuals wrap both stages, so zero
// weights reproduce the input.
Tensor temporal_attention_block(const ParameterStore& store, const std::string& prefix, const EncoderConfig& config,
                                const Tensor& x, AttentionProbe* probe = nullptr);

// Σ_k T_k · x · Θ_k applied to every time slice (no residual).
Tensor chebyshev_conv(const Tensor& x, const std::vector<Tensor>& basis, const std::vector<Tensor>& thetas);

Tensor spatial_cheb_block(const ParameterStore& store, const std::string& prefix, const EncoderConfig& config,
                          const Tensor& x, const std::vector<Tensor>& basis);

EncoderActivations encoder_layer(const ParameterStore& store, std::size_t layer, const EncoderConfig& config,
                                 const Tensor& x, const std::vector<Tensor>& basis, AttentionProbe* probe = nullptr);

// (Conv_v(x) + x) ⊙ sigmoid(Conv_g(x)) with per-position linear maps.
Tensor glu_output(const ParameterStore& store, const Tensor& x);

// Runs the layer stack (no input projection, no GLU) on an already lifted input.
Tensor encoder_stack(const ParameterStore& store, const EncoderConfig& config, const Tensor& x,
                     const std::vector<Tensor>& basis, std::vector<EncoderActivations>* activations = nullptr,
                     AttentionProbe* probe = nullptr);

// Full encoder: projection, layer stack and GLU head.
EncoderOutput encode(const ParameterStore& store, const EncoderConfig& config, const Tensor& x_raw,
                     const std::vector<Tensor>& basis, AttentionProbe* probe = nullptr);

}  // namespace stssl

#endif  // STSSL_ENCODER_HPP
