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
#ifndef STSSL_OPS_HPP
#define STSSL_OPS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "stssl/tensor.hpp"

// Differentiable operations on Tensor. Every op is a pure function of its
// inputs; when an input requires a gradient the result records a backward
// rule. Shape errors throw DimensionError naming the offending shapes.
namespace stssl {

// Binary elementwise ops broadcast numpy-style (shapes aligned on the right,
// extents equal or 1).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);

Tensor relu(const Tensor& x);
// Input clamped to [-40, 40] before exponentiation.
Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
// Domain x > 0; throws NumericError otherwise.
Tensor log(const Tensor& x);
// d|x|/dx at 0 is taken as 0.
Tensor abs(const Tensor& x);
// log(sigmoid(x)) computed without overflow for any finite x.
Tensor log_sigmoid(const Tensor& x);

// a: [..., k], b: [k, n] -> [..., n]. The leading axes of `a` are flattened
// into rows, so this covers plain 2-D products and per-position linear maps.
Tensor matmul(const Tensor& a, const Tensor& b);
// a: [B, m, k], b: [B, k, n] (or [B, n, k] with transpose_b) -> [B, m, n].
Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b = false);
// m: [n, k], x: [..., k, d] -> [..., n, d]; applies m to every trailing k×d slice.
Tensor node_mix(const Tensor& m, const Tensor& x);

Tensor transpose(const Tensor& x);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& perm);
Tensor reshape(const Tensor& x, Shape shape);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum(const Tensor& x, std::size_t axis, bool keepdim = false);
Tensor mean(const Tensor& x, std::size_t axis, bool keepdim = false);

// Max-subtracted for stability.
Tensor softmax(const Tensor& x, std::size_t axis);
Tensor log_softmax(const Tensor& x, std::size_t axis);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor index_select(const Tensor& x, std::size_t axis, std::span<const std::size_t> indices);

}  // namespace stssl

#endif  // STSSL_OPS_HPP
