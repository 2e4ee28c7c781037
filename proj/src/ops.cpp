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
#include "stssl/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "stssl/errors.hpp"

namespace stssl {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

constexpr double kExpClamp = 40.0;

// Strides of `shape` right-aligned against an output of rank `rank`; broadcast
// axes get stride 0.
std::vector<std::size_t> broadcast_strides(const Shape& shape, const Shape& out) {
  std::vector<std::size_t> strides(out.size(), 0);
  std::size_t stride = 1;
  const std::size_t offset = out.size() - shape.size();
  for (std::size_t i = shape.size(); i-- > 0;) {
    strides[i + offset] = shape[i] == 1 ? 0 : stride;
    stride *= shape[i];
  }
  return strides;
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw DimensionError(std::string(op) + ": cannot broadcast " + shape_to_string(a) + " with " +
                           shape_to_string(b));
    }
    out[i] = std::max(da, db);
  }
  return out;
}

// Visits every output element with its offsets into the two inputs.
template <typename Fn>
void for_each_broadcast(const Shape& out, const std::vector<std::size_t>& sa, const std::vector<std::size_t>& sb,
                        Fn&& fn) {
  const std::size_t total = shape_numel(out);
  if (total == 0) return;
  if (out.empty()) {
    fn(std::size_t{0}, std::size_t{0}, std::size_t{0});
    return;
  }
  const std::size_t rank = out.size();
  const std::size_t inner = out[rank - 1];
  const std::size_t ia_step = sa[rank - 1];
  const std::size_t ib_step = sb[rank - 1];
  std::vector<std::size_t> index(rank, 0);
  std::size_t oa = 0;
  std::size_t ob = 0;
  for (std::size_t i = 0; i < total; i += inner) {
    for (std::size_t j = 0; j < inner; ++j) fn(i + j, oa + j * ia_step, ob + j * ib_step);
    // Advance the odometer over all axes except the last.
    for (std::size_t axis = rank - 1; axis-- > 0;) {
      ++index[axis];
      oa += sa[axis];
      ob += sb[axis];
      if (index[axis] < out[axis]) break;
      oa -= sa[axis] * out[axis];
      ob -= sb[axis] * out[axis];
      index[axis] = 0;
    }
  }
}

template <typename Forward, typename DA, typename DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* name, Forward f, DA da, DB db) {
  if (a.shape() == b.shape()) {
    const auto av = a.data();
    const auto bv = b.data();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i], bv[i]);
    return Tensor::make_result(a.shape(), std::move(out), name, {a, b},
                               [da, db](const TensorNode& self, std::span<const double> g, auto& gin) {
                                 const auto& x = self.parents[0]->value;
                                 const auto& y = self.parents[1]->value;
                                 if (!gin[0].empty()) {
                                   for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i] * da(x[i], y[i]);
                                 }
                                 if (!gin[1].empty()) {
                                   for (std::size_t i = 0; i < g.size(); ++i) gin[1][i] += g[i] * db(x[i], y[i]);
                                 }
                               });
  }
  Shape out_shape = broadcast_shape(a.shape(), b.shape(), name);
  auto sa = broadcast_strides(a.shape(), out_shape);
  auto sb = broadcast_strides(b.shape(), out_shape);
  std::vector<double> out(shape_numel(out_shape));
  const auto av = a.data();
  const auto bv = b.data();
  for_each_broadcast(out_shape, sa, sb,
                     [&](std::size_t i, std::size_t ia, std::size_t ib) { out[i] = f(av[ia], bv[ib]); });
  return Tensor::make_result(
      out_shape, std::move(out), name, {a, b},
      [da, db, sa, sb](const TensorNode& self, std::span<const double> g, auto& gin) {
        const auto& x = self.parents[0]->value;
        const auto& y = self.parents[1]->value;
        for_each_broadcast(self.shape, sa, sb, [&](std::size_t i, std::size_t ia, std::size_t ib) {
          if (!gin[0].empty()) gin[0][ia] += g[i] * da(x[ia], y[ib]);
          if (!gin[1].empty()) gin[1][ib] += g[i] * db(x[ia], y[ib]);
        });
      });
}

// `deriv(x, y)` gives dy/dx from the input and the forward output.
template <typename Forward, typename Deriv>
Tensor unary(const Tensor& x, const char* name, Forward f, Deriv deriv) {
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xv[i]);
  return Tensor::make_result(x.shape(), std::move(out), name, {x},
                             [deriv](const TensorNode& self, std::span<const double> g, auto& gin) {
                               const auto& in = self.parents[0]->value;
                               for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i] * deriv(in[i], self.value[i]);
                             });
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for " +
                         shape_to_string(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

double clamp_exp(double x) { return std::clamp(x, -kExpClamp, kExpClamp); }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor scale(const Tensor& x, double factor) {
  return unary(
      x, "scale", [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(
      x, "add_scalar", [value](double v) { return v + value; }, [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, "sigmoid", [](double v) { return 1.0 / (1.0 + std::exp(-clamp_exp(v))); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, "exp", [](double v) { return std::exp(clamp_exp(v)); },
      [](double v, double y) { return std::abs(v) <= kExpClamp ? y : 0.0; });
}

Tensor log(const Tensor& x) {
  for (double v : x.data()) {
    if (!(v > 0.0)) throw NumericError("log of non-positive value " + std::to_string(v));
  }
  return unary(
      x, "log", [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor abs(const Tensor& x) {
  return unary(
      x, "abs", [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor log_sigmoid(const Tensor& x) {
  return unary(
      x, "log_sigmoid", [](double v) { return std::min(v, 0.0) - std::log1p(std::exp(-std::abs(v))); },
      [](double v, double) {
        // sigmoid(-v), evaluated on the stable side.
        if (v >= 0.0) {
          const double e = std::exp(-v);
          return e / (1.0 + e);
        }
        return 1.0 / (1.0 + std::exp(v));
      });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 1 || b.rank() != 2 || a.shape().back() != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
  }
  const std::size_t k = b.dim(0);
  const std::size_t n = b.dim(1);
  const std::size_t m = a.numel() / k;
  Shape out_shape = a.shape();
  out_shape.back() = n;
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() = ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
  return Tensor::make_result(std::move(out_shape), std::move(out), "matmul", {a, b},
                             [m, k, n](const TensorNode& self, std::span<const double> g, auto& gin) {
                               ConstMap gm(g.data(), m, n);
                               if (!gin[0].empty()) {
                                 MutMap(gin[0].data(), m, k).noalias() +=
                                     gm * ConstMap(self.parents[1]->value.data(), k, n).transpose();
                               }
                               if (!gin[1].empty()) {
                                 MutMap(gin[1].data(), k, n).noalias() +=
                                     ConstMap(self.parents[0]->value.data(), m, k).transpose() * gm;
                               }
                             });
}

Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b) {
  const bool ok = a.rank() == 3 && b.rank() == 3 && a.dim(0) == b.dim(0) &&
                  a.dim(2) == (transpose_b ? b.dim(2) : b.dim(1));
  if (!ok) {
    throw DimensionError("bmm: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()) + (transpose_b ? " (b transposed)" : ""));
  }
  const std::size_t batch = a.dim(0);
  const std::size_t m = a.dim(1);
  const std::size_t k = a.dim(2);
  const std::size_t n = transpose_b ? b.dim(1) : b.dim(2);
  std::vector<double> out(batch * m * n);
  const double* ap = a.data().data();
  const double* bp = b.data().data();
  for (std::size_t i = 0; i < batch; ++i) {
    MutMap c(out.data() + i * m * n, m, n);
    ConstMap am(ap + i * m * k, m, k);
    if (transpose_b) {
      c.noalias() = am * ConstMap(bp + i * n * k, n, k).transpose();
    } else {
      c.noalias() = am * ConstMap(bp + i * k * n, k, n);
    }
  }
  return Tensor::make_result(
      {batch, m, n}, std::move(out), transpose_b ? "bmm_nt" : "bmm", {a, b},
      [batch, m, k, n, transpose_b](const TensorNode& self, std::span<const double> g, auto& gin) {
        const double* ap = self.parents[0]->value.data();
        const double* bp = self.parents[1]->value.data();
        for (std::size_t i = 0; i < batch; ++i) {
          ConstMap gm(g.data() + i * m * n, m, n);
          if (!gin[0].empty()) {
            MutMap ga(gin[0].data() + i * m * k, m, k);
            if (transpose_b) {
              ga.noalias() += gm * ConstMap(bp + i * n * k, n, k);
            } else {
              ga.noalias() += gm * ConstMap(bp + i * k * n, k, n).transpose();
            }
          }
          if (!gin[1].empty()) {
            ConstMap am(ap + i * m * k, m, k);
            if (transpose_b) {
              MutMap(gin[1].data() + i * n * k, n, k).noalias() += gm.transpose() * am;
            } else {
              MutMap(gin[1].data() + i * k * n, k, n).noalias() += am.transpose() * gm;
            }
          }
        }
      });
}

Tensor node_mix(const Tensor& m, const Tensor& x) {
  if (m.rank() != 2 || x.rank() < 2 || x.dim(x.rank() - 2) != m.dim(1)) {
    throw DimensionError("node_mix: incompatible shapes " + shape_to_string(m.shape()) + " and " +
                         shape_to_string(x.shape()));
  }
  const std::size_t n = m.dim(0);
  const std::size_t k = m.dim(1);
  const std::size_t d = x.shape().back();
  const std::size_t slices = x.numel() / (k * d);
  Shape out_shape = x.shape();
  out_shape[out_shape.size() - 2] = n;
  std::vector<double> out(slices * n * d);
  ConstMap mm(m.data().data(), n, k);
  const double* xp = x.data().data();
  for (std::size_t s = 0; s < slices; ++s) {
    MutMap(out.data() + s * n * d, n, d).noalias() = mm * ConstMap(xp + s * k * d, k, d);
  }
  return Tensor::make_result(std::move(out_shape), std::move(out), "node_mix", {m, x},
                             [n, k, d, slices](const TensorNode& self, std::span<const double> g, auto& gin) {
                               ConstMap mm(self.parents[0]->value.data(), n, k);
                               const double* xp = self.parents[1]->value.data();
                               for (std::size_t s = 0; s < slices; ++s) {
                                 ConstMap gs(g.data() + s * n * d, n, d);
                                 if (!gin[0].empty()) {
                                   MutMap(gin[0].data(), n, k).noalias() +=
                                       gs * ConstMap(xp + s * k * d, k, d).transpose();
                                 }
                                 if (!gin[1].empty()) {
                                   MutMap(gin[1].data() + s * k * d, k, d).noalias() += mm.transpose() * gs;
                                 }
                               }
                             });
}

Tensor transpose(const Tensor& x) {
  if (x.rank() != 2) throw DimensionError("transpose expects a matrix, got " + shape_to_string(x.shape()));
  return permute(x, {1, 0});
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& perm) {
  const Shape& in = x.shape();
  if (perm.size() != in.size()) {
    throw DimensionError("permute: permutation of length " + std::to_string(perm.size()) + " for shape " +
                         shape_to_string(in));
  }
  std::vector<bool> seen(in.size(), false);
  for (std::size_t p : perm) {
    if (p >= in.size() || seen[p]) throw DimensionError("permute: invalid permutation for " + shape_to_string(in));
    seen[p] = true;
  }
  std::vector<std::size_t> in_strides(in.size(), 1);
  for (std::size_t i = in.size(); i-- > 1;) in_strides[i - 1] = in_strides[i] * in[i];
  Shape out_shape(in.size());
  std::vector<std::size_t> gather_strides(in.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out_shape[i] = in[perm[i]];
    gather_strides[i] = in_strides[perm[i]];
  }
  // source[i] is the input offset feeding output element i.
  auto source = std::make_shared<std::vector<std::size_t>>(x.numel());
  const std::vector<std::size_t> zero(out_shape.size(), 0);
  for_each_broadcast(out_shape, gather_strides, zero,
                     [&](std::size_t i, std::size_t ia, std::size_t) { (*source)[i] = ia; });
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[(*source)[i]];
  return Tensor::make_result(std::move(out_shape), std::move(out), "permute", {x},
                             [source](const TensorNode&, std::span<const double> g, auto& gin) {
                               for (std::size_t i = 0; i < g.size(); ++i) gin[0][(*source)[i]] += g[i];
                             });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_to_string(x.shape()) + " as " + shape_to_string(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return Tensor::make_result(std::move(shape), std::move(out), "reshape", {x},
                             [](const TensorNode&, std::span<const double> g, auto& gin) {
                               for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i];
                             });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return Tensor::make_result({1}, {total}, "sum", {x},
                             [](const TensorNode&, std::span<const double> g, auto& gin) {
                               for (double& v : gin[0]) v += g[0];
                             });
}

Tensor mean(const Tensor& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor sum(const Tensor& x, std::size_t axis, bool keepdim) {
  const AxisSplit s = split_at(x.shape(), axis, "sum");
  Shape out_shape = x.shape();
  if (keepdim) {
    out_shape[axis] = 1;
  } else {
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  }
  std::vector<double> out(s.outer * s.inner, 0.0);
  const auto xv = x.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t a = 0; a < s.extent; ++a) {
      const double* src = xv.data() + (o * s.extent + a) * s.inner;
      double* dst = out.data() + o * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
    }
  }
  return Tensor::make_result(std::move(out_shape), std::move(out), "sum_axis", {x},
                             [s](const TensorNode&, std::span<const double> g, auto& gin) {
                               for (std::size_t o = 0; o < s.outer; ++o) {
                                 for (std::size_t a = 0; a < s.extent; ++a) {
                                   double* dst = gin[0].data() + (o * s.extent + a) * s.inner;
                                   const double* src = g.data() + o * s.inner;
                                   for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
                                 }
                               }
                             });
}

Tensor mean(const Tensor& x, std::size_t axis, bool keepdim) {
  const double extent = static_cast<double>(x.dim(axis));
  return scale(sum(x, axis, keepdim), 1.0 / extent);
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const AxisSplit s = split_at(x.shape(), axis, "softmax");
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < s.extent; ++a) peak = std::max(peak, xv[base + a * s.inner]);
      double total = 0.0;
      for (std::size_t a = 0; a < s.extent; ++a) {
        const double e = std::exp(xv[base + a * s.inner] - peak);
        out[base + a * s.inner] = e;
        total += e;
      }
      for (std::size_t a = 0; a < s.extent; ++a) out[base + a * s.inner] /= total;
    }
  }
  return Tensor::make_result(x.shape(), std::move(out), "softmax", {x},
                             [s](const TensorNode& self, std::span<const double> g, auto& gin) {
                               const auto& y = self.value;
                               for (std::size_t o = 0; o < s.outer; ++o) {
                                 for (std::size_t i = 0; i < s.inner; ++i) {
                                   const std::size_t base = o * s.extent * s.inner + i;
                                   double dot = 0.0;
                                   for (std::size_t a = 0; a < s.extent; ++a) {
                                     dot += g[base + a * s.inner] * y[base + a * s.inner];
                                   }
                                   for (std::size_t a = 0; a < s.extent; ++a) {
                                     const std::size_t j = base + a * s.inner;
                                     gin[0][j] += y[j] * (g[j] - dot);
                                   }
                                 }
                               }
                             });
}

Tensor log_softmax(const Tensor& x, std::size_t axis) {
  const AxisSplit s = split_at(x.shape(), axis, "log_softmax");
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < s.extent; ++a) peak = std::max(peak, xv[base + a * s.inner]);
      double total = 0.0;
      for (std::size_t a = 0; a < s.extent; ++a) total += std::exp(xv[base + a * s.inner] - peak);
      const double log_norm = peak + std::log(total);
      for (std::size_t a = 0; a < s.extent; ++a) out[base + a * s.inner] = xv[base + a * s.inner] - log_norm;
    }
  }
  return Tensor::make_result(x.shape(), std::move(out), "log_softmax", {x},
                             [s](const TensorNode& self, std::span<const double> g, auto& gin) {
                               const auto& y = self.value;
                               for (std::size_t o = 0; o < s.outer; ++o) {
                                 for (std::size_t i = 0; i < s.inner; ++i) {
                                   const std::size_t base = o * s.extent * s.inner + i;
                                   double total = 0.0;
                                   for (std::size_t a = 0; a < s.extent; ++a) total += g[base + a * s.inner];
                                   for (std::size_t a = 0; a < s.extent; ++a) {
                                     const std::size_t j = base + a * s.inner;
                                     gin[0][j] += g[j] - std::exp(y[j]) * total;
                                   }
                                 }
                               }
                             });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  const Shape& first = parts.front().shape();
  split_at(first, axis, "concat");
  std::vector<std::size_t> extents;
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    Shape probe = p.shape();
    if (probe.size() != first.size()) {
      throw DimensionError("concat: rank mismatch " + shape_to_string(first) + " vs " + shape_to_string(probe));
    }
    probe[axis] = first[axis];
    if (probe != first) {
      throw DimensionError("concat: shape mismatch " + shape_to_string(first) + " vs " + shape_to_string(p.shape()));
    }
    extents.push_back(p.dim(axis));
    out_shape[axis] += p.dim(axis);
  }
  const AxisSplit s = split_at(out_shape, axis, "concat");
  std::vector<double> out(shape_numel(out_shape));
  std::size_t start = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto pv = parts[p].data();
    const std::size_t block = extents[p] * s.inner;
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy_n(pv.data() + o * block, block, out.data() + o * s.extent * s.inner + start * s.inner);
    }
    start += extents[p];
  }
  return Tensor::make_result(std::move(out_shape), std::move(out), "concat", parts,
                             [s, extents](const TensorNode&, std::span<const double> g, auto& gin) {
                               std::size_t start = 0;
                               for (std::size_t p = 0; p < extents.size(); ++p) {
                                 const std::size_t block = extents[p] * s.inner;
                                 if (!gin[p].empty()) {
                                   for (std::size_t o = 0; o < s.outer; ++o) {
                                     const double* src = g.data() + o * s.extent * s.inner + start * s.inner;
                                     double* dst = gin[p].data() + o * block;
                                     for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
                                   }
                                 }
                                 start += extents[p];
                               }
                             });
}

Tensor index_select(const Tensor& x, std::size_t axis, std::span<const std::size_t> indices) {
  const AxisSplit s = split_at(x.shape(), axis, "index_select");
  for (std::size_t idx : indices) {
    if (idx >= s.extent) {
      throw DimensionError("index_select: index " + std::to_string(idx) + " out of range for axis extent " +
                           std::to_string(s.extent));
    }
  }
  Shape out_shape = x.shape();
  out_shape[axis] = indices.size();
  std::vector<std::size_t> picks(indices.begin(), indices.end());
  const auto xv = x.data();
  std::vector<double> out(s.outer * picks.size() * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t a = 0; a < picks.size(); ++a) {
      std::copy_n(xv.data() + (o * s.extent + picks[a]) * s.inner, s.inner,
                  out.data() + (o * picks.size() + a) * s.inner);
    }
  }
  return Tensor::make_result(std::move(out_shape), std::move(out), "index_select", {x},
                             [s, picks](const TensorNode&, std::span<const double> g, auto& gin) {
                               for (std::size_t o = 0; o < s.outer; ++o) {
                                 for (std::size_t a = 0; a < picks.size(); ++a) {
                                   const double* src = g.data() + (o * picks.size() + a) * s.inner;
                                   double* dst = gin[0].data() + (o * s.extent + picks[a]) * s.inner;
                                   for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
                                 }
                               }
                             });
}

}  // namespace stssl
