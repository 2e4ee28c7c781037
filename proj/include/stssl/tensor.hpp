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
#ifndef STSSL_TENSOR_HPP
#define STSSL_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace stssl {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

class Tensor;
struct TensorNode;

// Reverse-mode rule for one recorded op. `grad_out` is dL/d(output); entry i
// of `grad_in` receives dL/d(parent i) and is empty when that parent does not
// need a gradient. Rules accumulate (+=) into `grad_in`.
using BackwardFn = std::function<void(const TensorNode& self, std::span<const double> grad_out,
                                      std::vector<std::span<double>>& grad_in)>;

struct TensorNode {
  std::uint64_t id = 0;
  Shape shape;
  std::vector<double> value;
  bool requires_grad = false;
  // Only populated on leaves; intermediates hold their gradient in the sweep buffer.
  std::vector<double> grad;
  std::string op = "leaf";
  std::vector<std::shared_ptr<TensorNode>> parents;
  BackwardFn backward;

  bool is_leaf() const { return parents.empty(); }
};

/// Dense row-major array of doubles with optional gradient tracking.
///
/// Tensor is a cheap handle: copies share the underlying node. Every op
/// produces a fresh node; when any input requires a gradient the node keeps
/// references to its inputs and a backward rule, forming the graph that
/// ComputationTape linearizes.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;
  std::uint64_t id() const;

  std::span<const double> data() const;
  // Writable view of a leaf's values (parameter updates, test fixtures).
  std::span<double> mutable_data();
  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Same values, no history, no gradient.
  Tensor detach() const;
  Tensor clone() const;

  const std::shared_ptr<TensorNode>& node() const { return node_; }

  static Tensor make_result(Shape shape, std::vector<double> values, std::string op,
                            std::vector<Tensor> inputs, BackwardFn backward);

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<TensorNode> node_;
};

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

/// Topologically ordered view of the graph reachable from a root tensor.
/// Every node appears after all of its inputs.
class ComputationTape {
 public:
  static ComputationTape record(const Tensor& root);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<const TensorNode*>& nodes() const { return nodes_; }
  std::vector<std::uint64_t> leaf_ids() const;

  // One node per line: `op input_ids -> output_id shape`.
  std::string dump() const;

 private:
  std::vector<const TensorNode*> nodes_;
  std::vector<std::shared_ptr<TensorNode>> keep_alive_;
};

/// Accumulates d(loss)/d(leaf) into every leaf that requires a gradient.
/// Repeated calls without zeroing add up. Throws ContractError unless `loss`
/// holds exactly one element.
void backward(const ComputationTape& tape, const Tensor& loss);
void backward(const Tensor& loss);

// Asks the C allocator to serve large tensor buffers from the reusable heap
// instead of fresh page mappings. Idempotent; a no-op off glibc.
void reuse_large_allocations();

}  // namespace stssl

#endif  // STSSL_TENSOR_HPP
