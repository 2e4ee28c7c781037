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
#ifndef STSSL_GRADCHECK_HPP
#define STSSL_GRADCHECK_HPP

#include <functional>

#include "stssl/parameters.hpp"

namespace stssl {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
};

/// Compares reverse-mode gradients of `f` against central differences over
/// every entry of every parameter in `store`. The error per entry is
/// |analytic - numeric| / max(1, |numeric|).
///
/// `f` must be deterministic in the parameter values. Throws ContractError
/// for eps outside [1e-8, 1e-4] and NumericError if `f` returns a non-finite
/// value. Gradients held by `store` are zeroed on return.
GradCheckResult finite_difference_report(const std::function<Tensor()>& f, ParameterStore& store, double eps);

double finite_difference_check(const std::function<Tensor()>& f, ParameterStore& store, double eps = 1e-6);

}  // namespace stssl

#endif  // STSSL_GRADCHECK_HPP
