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
#include "stssl/optim.hpp"

#include <cmath>

#include "stssl/errors.hpp"

namespace stssl {

AdamState AdamState::for_parameters(const ParameterStore& store) {
  AdamState state;
  for (const auto& [name, param] : store) {
    state.m[name].assign(param.numel(), 0.0);
    state.v[name].assign(param.numel(), 0.0);
  }
  return state;
}

void adam_step(ParameterStore& store, AdamState& state, double learning_rate) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (auto& [name, param] : store) {
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.size() != param.numel()) m.assign(param.numel(), 0.0);
    if (v.size() != param.numel()) v.assign(param.numel(), 0.0);
    const bool has_grad = param.has_grad();
    const auto grad = param.grad();
    auto values = param.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = has_grad ? grad[i] : 0.0;
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
    param.zero_grad();
  }
}

double gradient_norm(const ParameterStore& store) {
  double total = 0.0;
  for (const auto& [name, param] : store) {
    for (double g : param.grad()) total += g * g;
  }
  return std::sqrt(total);
}

double clip_gradients(ParameterStore& store, double max_norm) {
  if (!(max_norm > 0.0)) throw ContractError("clip norm must be positive");
  const double norm = gradient_norm(store);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& [name, param] : store) {
      if (!param.has_grad()) continue;
      for (double& g : param.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

}  // namespace stssl
