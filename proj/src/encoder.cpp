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
#include "stssl/encoder.hpp"

#include <cmath>

#include "stssl/errors.hpp"
#include "stssl/ops.hpp"

namespace stssl {

namespace {

void require_finite(const Tensor& t, const std::string& where) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) throw NumericError("non-finite activation in " + where);
  }
}

void require_rank4(const Tensor& x, const char* op) {
  if (x.rank() != 4) {
    throw DimensionError(std::string(op) + " expects [batch, time, node, channel], got " + shape_to_string(x.shape()));
  }
}

Tensor linear(const ParameterStore& store, const std::string& name, const Tensor& x) {
  return add(matmul(x, store.get(name + ".weight")), store.get(name + ".bias"));
}

void add_linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  store.add(name + ".weight", xavier_uniform({in, out}, in, out, rng));
  store.add(name + ".bias", Tensor::zeros({out}));
}

}  // namespace

void EncoderConfig::validate() const {
  if (d_model == 0 || n_heads == 0 || n_layers == 0 || ffn_hidden == 0) {
    throw ConfigError("encoder sizes must all be at least 1");
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("d_model (" + std::to_string(d_model) + ") must be divisible by n_heads (" +
                      std::to_string(n_heads) + ")");
  }
}

void init_encoder_parameters(ParameterStore& store, const EncoderConfig& config, std::size_t input_window, Rng& rng) {
  config.validate();
  const std::size_t d = config.d_model;
  const std::size_t f = config.ffn_hidden;
  add_linear(store, "encoder.input", 1, d, rng);
  if (config.positional_encoding) {
    store.add("encoder.position", xavier_uniform({input_window, d}, input_window, d, rng));
  }
  for (std::size_t layer = 0; layer < config.n_layers; ++layer) {
    const std::string t = "encoder.layer" + std::to_string(layer) + ".temporal.";
    store.add(t + "wq", xavier_uniform({d, d}, d, d, rng));
    store.add(t + "wk", xavier_uniform({d, d}, d, d, rng));
    store.add(t + "wv", xavier_uniform({d, d}, d, d, rng));
    add_linear(store, t + "out", d, d, rng);
    add_linear(store, t + "ffn0", d, f, rng);
    add_linear(store, t + "ffn1", f, f, rng);
    add_linear(store, t + "ffn2", f, d, rng);
    const std::string s = "encoder.layer" + std::to_string(layer) + ".spatial.";
    for (std::size_t k = 0; k <= config.cheb_order; ++k) {
      store.add(s + "theta" + std::to_string(k), xavier_uniform({d, d}, d, d, rng));
    }
  }
  add_linear(store, "encoder.glu.value", d, d, rng);
  add_linear(store, "encoder.glu.gate", d, d, rng);
}

std::vector<Tensor> basis_tensors(const ChebyshevBasis& basis) {
  std::vector<Tensor> out;
  out.reserve(basis.matrices.size());
  for (const auto& m : basis.matrices) {
    const auto n = static_cast<std::size_t>(m.rows());
    std::vector<double> values(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) values[i * n + j] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    out.push_back(Tensor::from({n, n}, std::move(values)));
  }
  return out;
}

Tensor input_projection(const ParameterStore& store, const EncoderConfig& config, const Tensor& x_raw) {
  require_rank4(x_raw, "input_projection");
  if (x_raw.dim(3) != 1) throw DimensionError("input_projection expects one speed channel");
  Tensor h = linear(store, "encoder.input", x_raw);
  if (config.positional_encoding) {
    const Tensor& pos = store.get("encoder.position");
    if (pos.dim(0) != x_raw.dim(1)) {
      throw DimensionError("input window " + std::to_string(x_raw.dim(1)) + " does not match position table " +
                           shape_to_string(pos.shape()));
    }
    h = add(h, reshape(pos, {pos.dim(0), 1, pos.dim(1)}));
  }
  return h;
}

Tensor temporal_attention_block(const ParameterStore& store, const std::string& prefix, const EncoderConfig& config,
                                const Tensor& x, AttentionProbe* probe) {
  require_rank4(x, "temporal_attention_block");
  const std::size_t batch = x.dim(0);
  const std::size_t steps = x.dim(1);
  const std::size_t nodes = x.dim(2);
  const std::size_t d = x.dim(3);
  const std::size_t heads = config.n_heads;
  if (d != config.d_model) throw DimensionError("temporal block width does not match d_model");
  const std::size_t dk = d / heads;

  // [B, N, T, d]: attention runs along time for every node independently.
  const Tensor xn = permute(x, {0, 2, 1, 3});
  auto split_heads = [&](const Tensor& t) {
    Tensor r = reshape(t, {batch, nodes, steps, heads, dk});
    r = permute(r, {0, 1, 3, 2, 4});
    return reshape(r, {batch * nodes * heads, steps, dk});
  };
  const Tensor q = split_heads(matmul(xn, store.get(prefix + "wq")));
  const Tensor k = split_heads(matmul(xn, store.get(prefix + "wk")));
  const Tensor v = split_heads(matmul(xn, store.get(prefix + "wv")));

  const Tensor scores = softmax(scale(bmm(q, k, true), 1.0 / std::sqrt(static_cast<double>(dk))), 2);
  if (probe != nullptr) probe->scores.push_back(scores.detach());

  Tensor attended = bmm(scores, v);
  attended = reshape(attended, {batch, nodes, heads, steps, dk});
  attended = permute(attended, {0, 1, 3, 2, 4});
  attended = reshape(attended, {batch, nodes, steps, d});
  attended = linear(store, prefix + "out", attended);

  const Tensor m = add(attended, xn);
  Tensor ffn = relu(linear(store, prefix + "ffn0", m));
  ffn = relu(linear(store, prefix + "ffn1", ffn));
  ffn = linear(store, prefix + "ffn2", ffn);
  const Tensor out = permute(add(ffn, m), {0, 2, 1, 3});
  require_finite(out, prefix + "attention");
  return out;
}

Tensor chebyshev_conv(const Tensor& x, const std::vector<Tensor>& basis, const std::vector<Tensor>& thetas) {
  require_rank4(x, "chebyshev_conv");
  if (basis.size() != thetas.size() || basis.empty()) {
    throw DimensionError("Chebyshev basis has " + std::to_string(basis.size()) + " terms but " +
                         std::to_string(thetas.size()) + " coefficient matrices were given");
  }
  Tensor total;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis[k].dim(0) != x.dim(2)) {
      throw DimensionError("Chebyshev basis is " + shape_to_string(basis[k].shape()) + " but input has " +
                           std::to_string(x.dim(2)) + " nodes");
    }
    // T_0 is the identity.
    const Tensor mixed = k == 0 ? x : node_mix(basis[k], x);
    const Tensor term = matmul(mixed, thetas[k]);
    total = k == 0 ? term : add(total, term);
  }
  return total;
}

Tensor spatial_cheb_block(const ParameterStore& store, const std::string& prefix, const EncoderConfig& config,
                          const Tensor& x, const std::vector<Tensor>& basis) {
  if (basis.size() != config.cheb_order + 1) {
    throw DimensionError("basis order " + std::to_string(basis.size() - 1) + " does not match cheb_order " +
                         std::to_string(config.cheb_order));
  }
  std::vector<Tensor> thetas;
  for (std::size_t k = 0; k <= config.cheb_order; ++k) thetas.push_back(store.get(prefix + "theta" + std::to_string(k)));
  const Tensor out = add(chebyshev_conv(x, basis, thetas), x);
  require_finite(out, prefix + "chebyshev");
  return out;
}

EncoderActivations encoder_layer(const ParameterStore& store, std::size_t layer, const EncoderConfig& config,
                                 const Tensor& x, const std::vector<Tensor>& basis, AttentionProbe* probe) {
  const std::string base = "encoder.layer" + std::to_string(layer);
  EncoderActivations act;
  act.x_in = x;
  act.x_temporal = temporal_attention_block(store, base + ".temporal.", config, x, probe);
  act.x_spatial = spatial_cheb_block(store, base + ".spatial.", config, act.x_temporal, basis);
  return act;
}

Tensor glu_output(const ParameterStore& store, const Tensor& x) {
  const Tensor value = add(linear(store, "encoder.glu.value", x), x);
  const Tensor gate = sigmoid(linear(store, "encoder.glu.gate", x));
  return mul(value, gate);
}

Tensor encoder_stack(const ParameterStore& store, const EncoderConfig& config, const Tensor& x,
                     const std::vector<Tensor>& basis, std::vector<EncoderActivations>* activations,
                     AttentionProbe* probe) {
  Tensor h = x;
  for (std::size_t layer = 0; layer < config.n_layers; ++layer) {
    EncoderActivations act = encoder_layer(store, layer, config, h, basis, probe);
    h = act.x_spatial;
    if (activations != nullptr) activations->push_back(std::move(act));
  }
  return h;
}

EncoderOutput encode(const ParameterStore& store, const EncoderConfig& config, const Tensor& x_raw,
                     const std::vector<Tensor>& basis, AttentionProbe* probe) {
  EncoderOutput out;
  const Tensor lifted = input_projection(store, config, x_raw);
  const Tensor top = encoder_stack(store, config, lifted, basis, &out.layers, probe);
  out.x_st = glu_output(store, top);
  return out;
}

}  // namespace stssl
