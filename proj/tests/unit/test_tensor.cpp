// Copyright 2026 The Domstyle Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "domstyle/error.hpp"
#include "domstyle/ops.hpp"
#include "domstyle/tensor.hpp"
#include "support/test_util.hpp"

namespace domstyle {
namespace {

using testing::grad_check;
using testing::random_tensor;

TEST(TensorTest, ShapeAndStorage) {
  Tensor t(Shape{2, 3}, 1.5f);
  EXPECT_EQ(t.numel(), 6);
  EXPECT_EQ(t.rank(), 2);
  EXPECT_FLOAT_EQ(t.data()[5], 1.5f);
  EXPECT_THROW(Tensor(Shape{2, 0}), Error);
  EXPECT_THROW(Tensor(Shape{1, 1, 1, 1, 1}), Error);
  EXPECT_THROW(Tensor(Shape{2}, std::vector<float>{1.0f}), Error);
}

TEST(TensorTest, CopiesShareStorageDetachDoesNot) {
  Tensor a(Shape{2}, std::vector<float>{1, 2});
  Tensor b = a;
  b.mutable_data()[0] = 5;
  EXPECT_EQ(a.data()[0], 5);
  Tensor c = a.detach();
  c.mutable_data()[0] = 7;
  EXPECT_EQ(a.data()[0], 5);
}

TEST(TensorTest, NonFiniteValuesRejectedAtConstruction) {
  EXPECT_THROW(Tensor(Shape{1}, std::vector<float>{std::numeric_limits<float>::quiet_NaN()}),
               Error);
}

TEST(ElementwiseTest, DocumentedValues) {
  EXPECT_FLOAT_EQ(sigmoid(Tensor::scalar(0)).item(), 0.5f);
  EXPECT_FLOAT_EQ(relu(Tensor::scalar(-3)).item(), 0.0f);
  EXPECT_FLOAT_EQ(relu(Tensor::scalar(3)).item(), 3.0f);
  const Tensor s = add(Tensor(Shape{2}, {1, 2}), Tensor(Shape{2}, {3, 4}));
  EXPECT_FLOAT_EQ(s.data()[0], 4);
  EXPECT_FLOAT_EQ(s.data()[1], 6);
  EXPECT_FLOAT_EQ(leaky_relu(Tensor::scalar(-2), 0.2f).item(), -0.4f);
  EXPECT_FLOAT_EQ(pow(Tensor::scalar(3), 2).item(), 9.0f);
  EXPECT_FLOAT_EQ(abs(Tensor::scalar(-2.5f)).item(), 2.5f);
}

TEST(ElementwiseTest, ScalarBroadcastAndShapeMismatch) {
  const Tensor a(Shape{3}, {1, 2, 3});
  const Tensor m = mul(a, Tensor::scalar(2));
  EXPECT_FLOAT_EQ(m.data()[2], 6);
  const Tensor d = div(Tensor::scalar(6), a);
  EXPECT_FLOAT_EQ(d.data()[1], 3);
  try {
    add(a, Tensor(Shape{2}, 1.0f));
    FAIL() << "expected a shape error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(ElementwiseTest, DivAndLogGuardZero) {
  EXPECT_TRUE(std::isfinite(div(Tensor::scalar(1), Tensor::scalar(0)).item()));
  EXPECT_NEAR(log(Tensor::scalar(0)).item(), std::log(1e-8), 1e-4);
}

TEST(ElementwiseTest, NonFiniteOutputIsAnError) {
  try {
    exp(Tensor::scalar(200));
    FAIL() << "expected overflow to be reported";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
}

TEST(ElementwiseTest, SigmoidStableForLargeMagnitudes) {
  EXPECT_FLOAT_EQ(sigmoid(Tensor::scalar(-80)).item(), 1.8048514e-35f);
  EXPECT_FLOAT_EQ(sigmoid(Tensor::scalar(80)).item(), 1.0f);
}

TEST(AutodiffTest, LinearMapGradientIsInput) {
  Tensor w(Shape{3}, {0.5f, -1, 2});
  const Tensor x(Shape{3}, {4, 5, 6});
  w.set_requires_grad(true);
  GradTape tape;
  const Tensor loss = sum(mul(w, x));
  tape.backward(loss);
  ASSERT_TRUE(w.has_grad());
  for (int i = 0; i < 3; ++i) EXPECT_FLOAT_EQ(w.grad()[i], x.data()[i]);
}

TEST(AutodiffTest, ReluOfNegativeHasZeroGradient) {
  Tensor w(Shape{4}, {-1, -2, -0.5f, -3});
  w.set_requires_grad(true);
  GradTape tape;
  tape.backward(sum(relu(w)));
  for (float g : w.grad()) EXPECT_EQ(g, 0.0f);
}

TEST(AutodiffTest, SharedSubexpressionAccumulatesOnce) {
  Tensor w = Tensor::scalar(3);
  w.set_requires_grad(true);
  GradTape tape;
  const Tensor y = mul(w, w);  // dy/dw = 2w
  tape.backward(add(y, w));    // + 1
  EXPECT_FLOAT_EQ(w.grad()[0], 7.0f);
}

TEST(AutodiffTest, BackwardRejectsNonScalarAndDoubleBackward) {
  Tensor w(Shape{2}, {1, 2});
  w.set_requires_grad(true);
  {
    GradTape tape;
    const Tensor y = scale(w, 2);
    EXPECT_THROW(tape.backward(y), Error);
  }
  GradTape tape;
  const Tensor loss = sum(w);
  tape.backward(loss);
  try {
    tape.backward(loss);
    FAIL() << "double backward must be rejected";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGradient);
  }
}

TEST(AutodiffTest, NothingRecordedWithoutTrackedInputs) {
  GradTape tape;
  const Tensor a(Shape{2}, {1, 2});
  (void)exp(a);
  EXPECT_EQ(tape.size(), 0u);
}

TEST(AutodiffTest, FreeBackwardUsesInnermostTape) {
  Tensor w = Tensor::scalar(2);
  w.set_requires_grad(true);
  GradTape outer;
  {
    GradTape inner;
    backward(mul(w, w));
    EXPECT_TRUE(inner.consumed());
  }
  EXPECT_FALSE(outer.consumed());
  EXPECT_FLOAT_EQ(w.grad()[0], 4.0f);
}

TEST(AutodiffTest, ElementwiseGradientsMatchFiniteDifferences) {
  Rng rng(11);
  struct Case {
    const char* name;
    std::function<Tensor(const Tensor&, const Tensor&)> fn;
    double lo, hi;
  };
  const std::vector<Case> cases = {
      {"add", [](const Tensor& a, const Tensor& b) { return add(a, b); }, -1, 1},
      {"sub", [](const Tensor& a, const Tensor& b) { return sub(a, b); }, -1, 1},
      {"mul", [](const Tensor& a, const Tensor& b) { return mul(a, b); }, -1, 1},
      {"div", [](const Tensor& a, const Tensor& b) { return div(a, b); }, 0.5, 2},
      {"relu", [](const Tensor& a, const Tensor&) { return relu(a); }, -1, 1},
      {"leaky", [](const Tensor& a, const Tensor&) { return leaky_relu(a, 0.2f); }, -1, 1},
      {"sigmoid", [](const Tensor& a, const Tensor&) { return sigmoid(a); }, -3, 3},
      {"log", [](const Tensor& a, const Tensor&) { return log(a); }, 0.5, 2},
      {"exp", [](const Tensor& a, const Tensor&) { return exp(a); }, -1, 1},
      {"abs", [](const Tensor& a, const Tensor&) { return abs(a); }, -1, 1},
      {"pow", [](const Tensor& a, const Tensor&) { return pow(a, 3); }, 0.5, 1.5},
      {"clamp", [](const Tensor& a, const Tensor&) { return clamp(a, -0.5f, 0.5f); }, -1, 1},
      {"mean", [](const Tensor& a, const Tensor& b) { return mean(mul(a, b)); }, -1, 1},
  };
  for (const auto& c : cases) {
    Tensor a = random_tensor(rng, Shape{4, 5}, c.lo, c.hi);
    Tensor b = random_tensor(rng, Shape{4, 5}, c.lo, c.hi);
    const auto r = grad_check([&] { return c.fn(a, b); }, {a, b}, 20, 5);
    EXPECT_GE(r.pass_rate(), 0.99) << c.name << " worst " << r.worst;
  }
}

}  // namespace
}  // namespace domstyle
