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
#include "stssl/parameters.hpp"

#include <algorithm>

#include "stssl/errors.hpp"

namespace stssl {

Tensor& ParameterStore::add(const std::string& name, Tensor value) {
  if (contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
  Tensor leaf = Tensor::from(value.shape(), std::vector<double>(value.data().begin(), value.data().end()), true);
  return entries_.emplace(name, std::move(leaf)).first->second;
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParameterStore::total_elements() const {
  std::size_t total = 0;
  for (const auto& [name, t] : entries_) total += t.numel();
  return total;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, t] : entries_) out.push_back(name);
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& [name, t] : entries_) t.zero_grad();
}

ParameterStore ParameterStore::clone() const {
  ParameterStore copy;
  for (const auto& [name, t] : entries_) copy.add(name, t);
  return copy;
}

void ParameterStore::set_all(double value) {
  for (auto& [name, t] : entries_) {
    auto d = t.mutable_data();
    std::fill(d.begin(), d.end(), value);
  }
}

}  // namespace stssl
