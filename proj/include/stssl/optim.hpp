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
#ifndef STSSL_OPTIM_HPP
#define STSSL_OPTIM_HPP

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "stssl/parameters.hpp"

namespace stssl {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step = 0;
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;

  // Zero moments shaped like every parameter in `store`.
  static AdamState for_parameters(const ParameterStore& store);
};

/// One bias-corrected Adam update over every parameter, then zeroes the
/// gradients. Parameters without a gradient are treated as having gradient 0.
void adam_step(ParameterStore& store, AdamState& state, double learning_rate);

// Global L2 norm over all gradients.
double gradient_norm(const ParameterStore& store);

// Rescales gradients so their global norm is at most max_norm; returns the norm before clipping.
double clip_gradients(ParameterStore& store, double max_norm);

}  // namespace stssl

#endif  // STSSL_OPTIM_HPP
