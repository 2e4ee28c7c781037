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
#include "stssl/tensor.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <atomic>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "stssl/errors.hpp"

namespace stssl {

namespace {

std::atomic<std::uint64_t> next_id{1};
thread_local bool grad_enabled = true;

std::shared_ptr<TensorNode> new_node(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("tensor of shape " + shape_to_string(shape) + " cannot hold " +
                         std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<TensorNode>();
  node->id = next_id.fetch_add(1, std::memory_order_relaxed);
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return node;
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> values(shape_numel(shape), value);
  return Tensor(new_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  return Tensor(new_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= node_->shape.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_to_string(node_->shape));
  }
  return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_->value.size(); }
std::uint64_t Tensor::id() const { return node_->id; }

std::span<const double> Tensor::data() const { return node_->value; }

std::span<double> Tensor::mutable_data() {
  if (!node_->is_leaf()) throw ContractError("mutable_data() is only available on leaf tensors");
  return node_->value;
}

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_to_string(shape()));
  return node_->value[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  const auto& s = shape();
  if (index.size() != s.size()) throw DimensionError("index rank does not match " + shape_to_string(s));
  std::size_t offset = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= s[axis]) throw DimensionError("index out of range for " + shape_to_string(s));
    offset = offset * s[axis] + i;
    ++axis;
  }
  return node_->value[offset];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

void Tensor::set_requires_grad(bool value) {
  if (!node_->is_leaf()) throw ContractError("requires_grad can only be toggled on leaf tensors");
  node_->requires_grad = value;
  if (!value) node_->grad.clear();
}

bool Tensor::has_grad() const { return !node_->grad.empty(); }

std::span<const double> Tensor::grad() const { return node_->grad; }

std::span<double> Tensor::mutable_grad() {
  if (node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(new_node(node_->shape, node_->value, false)); }

Tensor Tensor::clone() const { return Tensor(new_node(node_->shape, node_->value, node_->requires_grad)); }

Tensor Tensor::make_result(Shape shape, std::vector<double> values, std::string op, std::vector<Tensor> inputs,
                           BackwardFn backward) {
  bool track = false;
  if (grad_enabled) {
    for (const auto& in : inputs) track = track || in.requires_grad();
  }
  auto node = new_node(std::move(shape), std::move(values), track);
  node->op = std::move(op);
  if (track) {
    node->parents.reserve(inputs.size());
    for (auto& in : inputs) node->parents.push_back(in.node_);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }

bool grad_mode_enabled() { return grad_enabled; }

ComputationTape ComputationTape::record(const Tensor& root) {
  ComputationTape tape;
  if (!root.defined()) return tape;
  // Iterative post-order DFS so deep graphs do not exhaust the stack.
  std::unordered_map<const TensorNode*, bool> visited;
  std::vector<std::pair<TensorNode*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited[root.node().get()] = true;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorNode* parent = node->parents[next++].get();
      if (!visited[parent]) {
        visited[parent] = true;
        stack.emplace_back(parent, 0);
      }
      continue;
    }
    tape.nodes_.push_back(node);
    stack.pop_back();
  }
  tape.keep_alive_.push_back(root.node());
  return tape;
}

std::vector<std::uint64_t> ComputationTape::leaf_ids() const {
  std::vector<std::uint64_t> ids;
  for (const auto* node : nodes_) {
    if (node->is_leaf() && node->requires_grad) ids.push_back(node->id);
  }
  return ids;
}

std::string ComputationTape::dump() const {
  std::ostringstream out;
  for (const auto* node : nodes_) {
    out << node->op;
    for (const auto& p : node->parents) out << ' ' << p->id;
    out << " -> " << node->id << ' ' << shape_to_string(node->shape) << '\n';
  }
  return out.str();
}

void backward(const ComputationTape& tape, const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        (loss.defined() ? shape_to_string(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) return;

  const auto& nodes = tape.nodes();
  if (nodes.empty() || nodes.back() != loss.node().get()) {
    throw ContractError("tape was not recorded from this loss");
  }
  std::unordered_map<const TensorNode*, std::size_t> slot;
  slot.reserve(nodes.size());
  // Gradient buffers are allocated when the first consumer writes to them so
  // peak memory follows the live frontier of the reverse sweep.
  std::vector<std::vector<double>> grads(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) slot[nodes[i]] = i;
  grads.back().assign(1, 1.0);

  std::vector<std::span<double>> grad_in;
  for (std::size_t i = nodes.size(); i-- > 0;) {
    auto* node = const_cast<TensorNode*>(nodes[i]);
    if (!node->requires_grad || grads[i].empty()) continue;
    if (node->is_leaf()) {
      if (node->grad.empty()) node->grad.assign(node->value.size(), 0.0);
      for (std::size_t k = 0; k < node->grad.size(); ++k) node->grad[k] += grads[i][k];
      continue;
    }
    grad_in.assign(node->parents.size(), std::span<double>());
    for (std::size_t p = 0; p < node->parents.size(); ++p) {
      const auto* parent = node->parents[p].get();
      if (!parent->requires_grad) continue;
      auto& buffer = grads[slot.at(parent)];
      if (buffer.empty()) buffer.assign(parent->value.size(), 0.0);
      grad_in[p] = buffer;
    }
    node->backward(*node, grads[i], grad_in);
    // Release intermediate storage as soon as it has been propagated.
    std::vector<double>().swap(grads[i]);
  }
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ContractError("backward() needs a scalar loss");
  }
  backward(ComputationTape::record(loss), loss);
}

void reuse_large_allocations() {
#if defined(__GLIBC__)
  static const bool configured = [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    return true;
  }();
  (void)configured;
#endif
}

}  // namespace stssl
