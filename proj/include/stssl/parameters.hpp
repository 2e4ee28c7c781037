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
#ifndef STSSL_PARAMETERS_HPP
#define STSSL_PARAMETERS_HPP

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "stssl/tensor.hpp"

namespace stssl {

/// Named registry of learnable tensors. Iteration is lexicographic by name,
/// which fixes the order of initialization, optimizer updates and
/// serialization.
class ParameterStore {
 public:
  using Map = std::map<std::string, Tensor>;

  // Registers a leaf with requires_grad = true. Throws ContractError on duplicates.
  Tensor& add(const std::string& name, Tensor value);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return entries_.count(name) > 0; }

  std::size_t size() const { return entries_.size(); }
  std::size_t total_elements() const;
  std::vector<std::string> names() const;

  void zero_grad();
  // Deep copy: independent leaves with the same values and no gradients.
  ParameterStore clone() const;
  void set_all(double value);

  Map::iterator begin() { return entries_.begin(); }
  Map::iterator end() { return entries_.end(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

 private:
  Map entries_;
};

}  // namespace stssl

#endif  // STSSL_PARAMETERS_HPP
