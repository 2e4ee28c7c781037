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
#include "stssl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stssl/errors.hpp"

namespace stssl {

namespace {

double evaluate(const std::function<Tensor()>& f) {
  NoGradGuard no_grad;
  const double value = f().item();
  if (!std::isfinite(value)) throw NumericError("finite-difference probe produced a non-finite value");
  return value;
}

}  // namespace

GradCheckResult finite_difference_report(const std::function<Tensor()>& f, ParameterStore& store, double eps) {
  if (!(eps >= 1e-8 && eps <= 1e-4)) throw ContractError("eps must lie in [1e-8, 1e-4]");
  store.zero_grad();
  const Tensor loss = f();
  if (!std::isfinite(loss.item())) throw NumericError("objective is not finite");
  backward(loss);

  GradCheckResult result;
  for (auto& [name, param] : store) {
    std::vector<double> analytic(param.numel(), 0.0);
    if (param.has_grad()) std::copy(param.grad().begin(), param.grad().end(), analytic.begin());
    auto values = param.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = evaluate(f);
      values[i] = saved - eps;
      const double down = evaluate(f);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = name;
        result.worst_index = i;
      }
    }
  }
  store.zero_grad();
  return result;
}

double finite_difference_check(const std::function<Tensor()>& f, ParameterStore& store, double eps) {
  return finite_difference_report(f, store, eps).max_relative_error;
}

}  // namespace stssl
