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
#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "stssl/errors.hpp"
#include "stssl/gradcheck.hpp"
#include "stssl/ops.hpp"
#include "stssl/parameters.hpp"
#include "gradient_cases.hpp"
#include "test_util.hpp"

namespace stssl {
namespace {

using testing::random_tensor;

using testing::op_gradient_error;

constexpr double kOpTolerance = 1e-6;

TEST(Matmul, IdentityTimesMatrix) {
  const Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
  const Tensor m = Tensor::from({2, 2}, {3, 4, 5, 6});
  const Tensor c = matmul(eye, m);
  EXPECT_EQ(std::vector<double>(c.data().begin(), c.data().end()), (std::vector<double>{3, 4, 5, 6}));
}

TEST(Matmul, RowTimesColumn) {
  const Tensor c = matmul(Tensor::from({1, 2}, {1, 2}), Tensor::from({2, 1}, {3, 4}));
  EXPECT_EQ(c.shape(), (Shape{1, 1}));
  EXPECT_DOUBLE_EQ(c.item(), 11.0);
}

TEST(Matmul, RandomGradientMatchesFiniteDifference) {
  EXPECT_LE(op_gradient_error({{4, 5}, {5, 3}}, [](auto& in) { return matmul(in[0], in[1]); }, 1), kOpTolerance);
  EXPECT_LE(op_gradient_error({{2, 3, 5}, {5, 4}}, [](auto& in) { return matmul(in[0], in[1]); }, 2), kOpTolerance);
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  try {
    matmul(Tensor::zeros({2, 3}), Tensor::zeros({4, 2}));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4x2]"), std::string::npos) << msg;
  }
}

TEST(Softmax, UniformOnEqualInputs) {
  const Tensor s = softmax(Tensor::from({3}, {0, 0, 0}), 0);
  for (double v : s.data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, StableForLargeInputs) {
  const Tensor s = softmax(Tensor::from({2}, {1000, 0}), 0);
  EXPECT_TRUE(std::isfinite(s.data()[0]));
  EXPECT_NEAR(s.data()[0], 1.0, 1e-15);
  EXPECT_GE(s.data()[1], 0.0);
  EXPECT_LT(s.data()[1], 1e-300);
}

TEST(Softmax, RandomVectorSumsToOneAndJacobianMatches) {
  Rng rng(3);
  const Tensor x = random_tensor({7}, rng, -3, 3);
  const Tensor s = softmax(x, 0);
  double total = 0.0;
  for (double v : s.data()) {
    EXPECT_GE(v, 0.0);
    total += v;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_LE(op_gradient_error({{7}}, [](auto& in) { return softmax(in[0], 0); }, 4, -3, 3), kOpTolerance);
}

TEST(Softmax, AnyAxisIsADistribution) {
  Rng rng(5);
  const Tensor x = random_tensor({3, 4, 5}, rng, -5, 5);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const Tensor totals = sum(softmax(x, axis), axis);
    for (double v : totals.data()) EXPECT_NEAR(v, 1.0, 1e-12);
    EXPECT_LE(op_gradient_error({{3, 4, 5}}, [axis](auto& in) { return softmax(in[0], axis); }, 6 + axis),
              kOpTolerance);
  }
}

TEST(Backward, SumGivesOnes) {
  Tensor w = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6}, true);
  backward(sum(w));
  for (double g : w.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SquareGivesTwiceInput) {
  Tensor w = Tensor::from({3}, {1, 2, 3}, true);
  backward(sum(mul(w, w)));
  EXPECT_EQ(std::vector<double>(w.grad().begin(), w.grad().end()), (std::vector<double>{2, 4, 6}));
}

TEST(Backward, NonScalarLossIsContractError) {
  Tensor w = Tensor::from({3}, {1, 2, 3}, true);
  EXPECT_THROW(backward(mul(w, w)), ContractError);
}

TEST(Backward, RepeatedCallsAccumulate) {
  Tensor w = Tensor::from({2}, {1, -1}, true);
  const Tensor loss = sum(mul(w, w));
  backward(loss);
  backward(loss);
  EXPECT_EQ(w.grad()[0], 4.0);
  EXPECT_EQ(w.grad()[1], -4.0);
  w.zero_grad();
  backward(loss);
  EXPECT_EQ(w.grad()[0], 2.0);
}

TEST(Backward, SharedSubexpressionVisitedOnce) {
  // loss = sum((w*w) + (w*w)) reuses one node twice: dL/dw = 4w.
  Tensor w = Tensor::from({2}, {1.5, -2}, true);
  const Tensor sq = mul(w, w);
  const Tensor loss = sum(add(sq, sq));
  const ComputationTape tape = ComputationTape::record(loss);
  std::set<std::uint64_t> ids;
  for (const auto* node : tape.nodes()) EXPECT_TRUE(ids.insert(node->id).second);
  backward(tape, loss);
  EXPECT_DOUBLE_EQ(w.grad()[0], 6.0);
  EXPECT_DOUBLE_EQ(w.grad()[1], -8.0);
}

TEST(Tape, TopologicalOrder) {
  Rng rng(7);
  Tensor a = random_tensor({3, 4}, rng, -1, 1, true);
  Tensor b = random_tensor({4, 2}, rng, -1, 1, true);
  const Tensor loss = mean(sigmoid(add(matmul(a, b), Tensor::scalar(0.5))));
  const ComputationTape tape = ComputationTape::record(loss);
  std::set<std::uint64_t> seen;
  for (const auto* node : tape.nodes()) {
    for (const auto& p : node->parents) EXPECT_TRUE(seen.count(p->id)) << "input after consumer";
    seen.insert(node->id);
  }
  EXPECT_EQ(tape.nodes().back()->id, loss.id());
  const auto leaves = tape.leaf_ids();
  EXPECT_TRUE(std::find(leaves.begin(), leaves.end(), a.id()) != leaves.end());
  EXPECT_TRUE(std::find(leaves.begin(), leaves.end(), b.id()) != leaves.end());
}

TEST(Tape, DumpHasOneLinePerNode) {
  Tensor w = Tensor::from({2}, {1, 2}, true);
  const Tensor loss = sum(mul(w, w));
  const ComputationTape tape = ComputationTape::record(loss);
  std::istringstream lines(tape.dump());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    EXPECT_NE(line.find(" -> "), std::string::npos);
    ++count;
  }
  EXPECT_EQ(count, tape.size());
  EXPECT_NE(tape.dump().find("-> " + std::to_string(loss.id()) + " [1]"), std::string::npos) << tape.dump();
}

TEST(Tape, ReplayIsDeterministic) {
  Rng rng(8);
  Tensor a = random_tensor({5, 3}, rng, -1, 1, true);
  const Tensor loss = sum(log_softmax(matmul(a, transpose(a)), 1));
  const ComputationTape tape = ComputationTape::record(loss);
  backward(tape, loss);
  const std::vector<double> first(a.grad().begin(), a.grad().end());
  a.zero_grad();
  backward(tape, loss);
  EXPECT_EQ(first, std::vector<double>(a.grad().begin(), a.grad().end()));
}

TEST(NoGrad, SuppressesRecording) {
  Tensor w = Tensor::from({2}, {1, 2}, true);
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_mode_enabled());
    EXPECT_FALSE(mul(w, w).requires_grad());
  }
  EXPECT_TRUE(grad_mode_enabled());
  EXPECT_TRUE(mul(w, w).requires_grad());
}

TEST(Ops, ForwardIsPure) {
  Rng rng(9);
  const Tensor a = random_tensor({4, 6}, rng);
  const Tensor b = random_tensor({6, 3}, rng);
  const Tensor r1 = softmax(matmul(a, b), 1);
  const Tensor r2 = softmax(matmul(a, b), 1);
  EXPECT_EQ(std::vector<double>(r1.data().begin(), r1.data().end()),
            std::vector<double>(r2.data().begin(), r2.data().end()));
}

TEST(Ops, ElementwiseGradients) {
  EXPECT_LE(op_gradient_error({{3, 4}, {3, 4}}, [](auto& in) { return add(in[0], in[1]); }, 10), kOpTolerance);
  EXPECT_LE(op_gradient_error({{3, 4}, {4}}, [](auto& in) { return add(in[0], in[1]); }, 11), kOpTolerance);
  EXPECT_LE(op_gradient_error({{2, 1, 4}, {3, 1}}, [](auto& in) { return sub(in[0], in[1]); }, 12), kOpTolerance);
  EXPECT_LE(op_gradient_error({{2, 3, 4}, {1, 3, 1}}, [](auto& in) { return mul(in[0], in[1]); }, 13), kOpTolerance);
  EXPECT_LE(op_gradient_error({{5}}, [](auto& in) { return neg(in[0]); }, 14), kOpTolerance);
  EXPECT_LE(op_gradient_error({{5}}, [](auto& in) { return scale(in[0], -2.5); }, 15), kOpTolerance);
  EXPECT_LE(op_gradient_error({{5}}, [](auto& in) { return add_scalar(in[0], 3.0); }, 16), kOpTolerance);
  EXPECT_LE(op_gradient_error({{4, 3}}, [](auto& in) { return sigmoid(in[0]); }, 17, -4, 4), kOpTolerance);
  EXPECT_LE(op_gradient_error({{4, 3}}, [](auto& in) { return exp(in[0]); }, 18, -2, 2), kOpTolerance);
  EXPECT_LE(op_gradient_error({{4, 3}}, [](auto& in) { return log(in[0]); }, 19, 0.5, 3), kOpTolerance);
  EXPECT_LE(op_gradient_error({{4, 3}}, [](auto& in) { return log_sigmoid(in[0]); }, 20, -6, 6), kOpTolerance);
}

TEST(Ops, KinkedGradientsAwayFromKink) {
  // Inputs drawn from [0.1, 1] and negated halves keep every entry off zero.
  auto off_kink = [](const Tensor& x) { return mul(x, Tensor::from({2, 1}, {1, -1})); };
  EXPECT_LE(op_gradient_error({{2, 3}}, [&](auto& in) { return relu(off_kink(in[0])); }, 21, 0.1, 1), kOpTolerance);
  EXPECT_LE(op_gradient_error({{2, 3}}, [&](auto& in) { return abs(off_kink(in[0])); }, 22, 0.1, 1), kOpTolerance);
}

TEST(Ops, AbsSubgradientAtZeroIsZero) {
  Tensor w = Tensor::from({3}, {0, 2, -2}, true);
  backward(sum(abs(w)));
  EXPECT_EQ(std::vector<double>(w.grad().begin(), w.grad().end()), (std::vector<double>{0, 1, -1}));
}

TEST(Ops, ShapeGradients) {
  EXPECT_LE(op_gradient_error({{3, 5}}, [](auto& in) { return transpose(in[0]); }, 23), kOpTolerance);
  EXPECT_LE(op_gradient_error({{2, 3, 4}}, [](auto& in) { return permute(in[0], {2, 0, 1}); }, 24), kOpTolerance);
  EXPECT_LE(op_gradient_error({{2, 3, 4}}, [](auto& in) { return reshape(in[0], {6, 4}); }, 25), kOpTolerance);
  EXPECT_LE(op_gradient_error({{2, 3}, {2, 2}}, [](auto& in) { return concat({in[0], in[1]}, 1); }, 26),
            kOpTolerance);
  const std::vector<std::size_t> idx{2, 0, 2};
  EXPECT_LE(op_gradient_error({{3, 4}}, [&](auto& in) { return index_select(in[0], 0, idx); }, 27), kOpTolerance);
}

TEST(Ops, ReductionGradients) {
  EXPECT_LE(op_gradient_error({{3, 4}}, [](auto& in) { return sum(in[0]); }, 28), kOpTolerance);
  EXPECT_LE(op_gradient_error({{3, 4}}, [](auto& in) { return mean(in[0]); }, 29), kOpTolerance);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    EXPECT_LE(op_gradient_error({{2, 3, 4}}, [axis](auto& in) { return sum(in[0], axis); }, 30 + axis),
              kOpTolerance);
    EXPECT_LE(op_gradient_error({{2, 3, 4}}, [axis](auto& in) { return mean(in[0], axis, true); }, 40 + axis),
              kOpTolerance);
  }
  EXPECT_LE(op_gradient_error({{3, 5}}, [](auto& in) { return log_softmax(in[0], 1); }, 50, -3, 3), kOpTolerance);
}

TEST(Ops, BatchedProductGradients) {
  EXPECT_LE(op_gradient_error({{2, 3, 4}, {2, 4, 5}}, [](auto& in) { return bmm(in[0], in[1]); }, 51), kOpTolerance);
  EXPECT_LE(op_gradient_error({{2, 3, 4}, {2, 5, 4}}, [](auto& in) { return bmm(in[0], in[1], true); }, 52),
            kOpTolerance);
  EXPECT_LE(op_gradient_error({{3, 3}, {2, 3, 4}}, [](auto& in) { return node_mix(in[0], in[1]); }, 53),
            kOpTolerance);
}

TEST(Ops, EveryDifferentiableOpInSuite) {
  const auto suite = testing::op_gradient_suite();
  EXPECT_GE(suite.size(), 27u);
  for (const auto& c : suite) EXPECT_LE(c.error, kOpTolerance) << c.name;
}

TEST(Ops, BroadcastMismatchIsDimensionError) {
  EXPECT_THROW(add(Tensor::zeros({2, 3}), Tensor::zeros({4})), DimensionError);
  EXPECT_THROW(reshape(Tensor::zeros({2, 3}), {4}), DimensionError);
}

TEST(Ops, LogOutsideDomainIsNumericError) {
  EXPECT_THROW(log(Tensor::from({2}, {1, 0})), NumericError);
  EXPECT_THROW(log(Tensor::from({1}, {-1})), NumericError);
}

TEST(Ops, ClampedExponentialsStayFinite) {
  const Tensor s = sigmoid(Tensor::from({2}, {1000, -1000}));
  EXPECT_TRUE(std::isfinite(s.data()[0]) && std::isfinite(s.data()[1]));
  EXPECT_NEAR(s.data()[0], 1.0, 1e-15);
  EXPECT_TRUE(std::isfinite(exp(Tensor::from({1}, {1e6})).item()));
  EXPECT_TRUE(std::isfinite(log_sigmoid(Tensor::from({1}, {-1e6})).item()));
}

TEST(Tensor, ShapeInvariants) {
  EXPECT_THROW(Tensor::from({2, 2}, {1, 2, 3}), DimensionError);
  Tensor t = Tensor::zeros({2, 3, 4}, true);
  EXPECT_EQ(t.numel(), 24u);
  backward(sum(t));
  EXPECT_EQ(t.grad().size(), t.numel());
}

TEST(GradCheck, SquareAtThree) {
  ParameterStore store;
  store.add("w", Tensor::scalar(3.0));
  auto f = [&]() { return mul(store.get("w"), store.get("w")); };
  EXPECT_LE(finite_difference_check(f, store, 1e-6), 1e-9);
}

TEST(GradCheck, ConstantFunction) {
  ParameterStore store;
  store.add("w", Tensor::from({3}, {1, 2, 3}));
  auto f = []() { return Tensor::scalar(4.0); };
  EXPECT_EQ(finite_difference_check(f, store, 1e-6), 0.0);
}

TEST(GradCheck, DetectsAWrongGradient) {
  ParameterStore store;
  store.add("w", Tensor::scalar(2.0));
  // A custom op whose backward rule is deliberately off by a factor of two.
  auto f = [&]() {
    const Tensor& w = store.get("w");
    return Tensor::make_result({}, {w.item() * w.item()}, "bad_square", {w},
                               [](const TensorNode& self, std::span<const double> g,
                                  std::vector<std::span<double>>& gin) {
                                 if (!gin[0].empty()) gin[0][0] += g[0] * 4.0 * self.parents[0]->value[0];
                               });
  };
  EXPECT_GT(finite_difference_check(f, store, 1e-6), 0.5);
}

TEST(GradCheck, RejectsEpsOutsideRange) {
  ParameterStore store;
  store.add("w", Tensor::scalar(1.0));
  auto f = [&]() { return store.get("w"); };
  EXPECT_THROW(finite_difference_check(f, store, 1e-9), ContractError);
  EXPECT_THROW(finite_difference_check(f, store, 1e-3), ContractError);
}

TEST(GradCheck, NonFiniteObjectiveIsNumericError) {
  ParameterStore store;
  store.add("w", Tensor::scalar(1.0));
  auto f = [&]() { return scale(store.get("w"), std::numeric_limits<double>::infinity()); };
  EXPECT_THROW(finite_difference_check(f, store, 1e-6), NumericError);
}

TEST(ParameterStore, LexicographicOrderAndUniqueNames) {
  ParameterStore store;
  store.add("b", Tensor::zeros({1}));
  store.add("a.z", Tensor::zeros({2}));
  store.add("a.b", Tensor::zeros({3}));
  EXPECT_EQ(store.names(), (std::vector<std::string>{"a.b", "a.z", "b"}));
  EXPECT_THROW(store.add("b", Tensor::zeros({1})), ContractError);
  EXPECT_TRUE(store.get("a.z").requires_grad());
  EXPECT_EQ(store.total_elements(), 6u);
}

TEST(ParameterStore, CloneIsIndependent) {
  ParameterStore store;
  store.add("w", Tensor::from({2}, {1, 2}));
  ParameterStore copy = store.clone();
  copy.get("w").mutable_data()[0] = 9.0;
  EXPECT_EQ(store.get("w").data()[0], 1.0);
}

}  // namespace
}  // namespace stssl
