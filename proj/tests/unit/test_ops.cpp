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

#include <gtest/gtest.h>

#include "domstyle/error.hpp"
#include "domstyle/ops.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

namespace domstyle {
namespace {

using testing::grad_check;
using testing::naive_conv;
using testing::random_tensor;

void expect_close(const Tensor& a, const Tensor& b, double tol) {
  ASSERT_EQ(a.shape(), b.shape());
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    ASSERT_NEAR(a.data()[i], b.data()[i], tol) << "at " << i;
  }
}

TEST(Conv2dTest, ImpulseResponseStampsKernel) {
  Tensor x(Shape{1, 1, 3, 3}, 0.0f);
  x.mutable_data()[4] = 1.0f;
  const Tensor w(Shape{1, 1, 3, 3}, 1.0f);
  const Tensor y = conv2d(x, w, Tensor(), 1, PadMode::kZero, 1);
  for (float v : y.data()) EXPECT_FLOAT_EQ(v, 1.0f);
}

TEST(Conv2dTest, PointwiseIdentity) {
  Rng rng(1);
  const Tensor x = random_tensor(rng, Shape{2, 1, 5, 4});
  const Tensor y = conv2d(x, Tensor(Shape{1, 1, 1, 1}, 1.0f), Tensor(Shape{1}, 0.0f), 1,
                          PadMode::kZero, 0);
  expect_close(y, x, 0.0);
}

TEST(Conv2dTest, MatchesNestedLoopOracle) {
  Rng rng(2);
  for (PadMode mode : {PadMode::kZero, PadMode::kReflect}) {
    for (int stride : {1, 2}) {
      const Tensor x = random_tensor(rng, Shape{2, 3, 8, 8});
      const Tensor w = random_tensor(rng, Shape{4, 3, 3, 3});
      const Tensor b = random_tensor(rng, Shape{4});
      expect_close(conv2d(x, w, b, stride, mode, 1), naive_conv(x, w, b, stride, mode, 1),
                   1e-5);
    }
  }
  const Tensor x = random_tensor(rng, Shape{1, 2, 7, 9});
  const Tensor w = random_tensor(rng, Shape{3, 2, 5, 5});
  expect_close(conv2d(x, w, Tensor(), 1, PadMode::kReflect, 2),
               naive_conv(x, w, Tensor(), 1, PadMode::kReflect, 2), 1e-5);
}

TEST(Conv2dTest, StrideTwoFloorsExtent) {
  Rng rng(3);
  const Tensor x = random_tensor(rng, Shape{1, 2, 7, 7});
  const Tensor w = random_tensor(rng, Shape{2, 2, 3, 3});
  const Tensor y = conv2d(x, w, Tensor(), 2, PadMode::kZero, 1);
  EXPECT_EQ(y.shape(), (Shape{1, 2, 4, 4}));
  expect_close(y, naive_conv(x, w, Tensor(), 2, PadMode::kZero, 1), 1e-5);
}

TEST(Conv2dTest, RejectsBadShapes) {
  const Tensor x(Shape{1, 2, 4, 4}, 1.0f);
  EXPECT_THROW(conv2d(x, Tensor(Shape{1, 3, 3, 3}, 1.0f), Tensor(), 1, PadMode::kZero, 1),
               Error);
  EXPECT_THROW(conv2d(x, Tensor(Shape{1, 2, 2, 2}, 1.0f), Tensor(), 1, PadMode::kZero, 0),
               Error);
  EXPECT_THROW(conv2d(x, Tensor(Shape{1, 2, 7, 7}, 1.0f), Tensor(), 1, PadMode::kZero, 0),
               Error);
}

TEST(Conv2dTest, GradientsMatchFiniteDifferences) {
  Rng rng(4);
  for (PadMode mode : {PadMode::kZero, PadMode::kReflect}) {
    Tensor x = random_tensor(rng, Shape{2, 2, 5, 5});
    Tensor w = random_tensor(rng, Shape{3, 2, 3, 3});
    Tensor b = random_tensor(rng, Shape{3});
    const auto r =
        grad_check([&] { return conv2d(x, w, b, mode == PadMode::kZero ? 2 : 1, mode, 1); },
                   {x, w, b}, 40, 9);
    EXPECT_GE(r.pass_rate(), 0.99) << "worst " << r.worst;
  }
}

TEST(Pool2dTest, DocumentedValues) {
  const Tensor x(Shape{1, 1, 2, 2}, {1, 3, 5, 7});
  EXPECT_FLOAT_EQ(pool2d(x, PoolKind::kAvg).item(), 4.0f);
  EXPECT_FLOAT_EQ(pool2d(x, PoolKind::kMax).item(), 7.0f);
  const Tensor c(Shape{1, 2, 4, 6}, 0.25f);
  for (PoolKind k : {PoolKind::kAvg, PoolKind::kMax}) {
    const Tensor p = pool2d(c, k);
    for (float v : p.data()) EXPECT_FLOAT_EQ(v, 0.25f);
  }
  EXPECT_THROW(pool2d(Tensor(Shape{1, 1, 3, 4}, 1.0f), PoolKind::kAvg), Error);
}

TEST(Pool2dTest, MatchesWindowOracle) {
  Rng rng(5);
  const Tensor x = random_tensor(rng, Shape{2, 3, 8, 8});
  for (int k : {2, 4}) {
    const Tensor a = pool2d(x, PoolKind::kAvg, k, k);
    const Tensor m = pool2d(x, PoolKind::kMax, k, k);
    for (std::int64_t n = 0; n < 2; ++n)
      for (std::int64_t c = 0; c < 3; ++c)
        for (std::int64_t oy = 0; oy < 8 / k; ++oy)
          for (std::int64_t ox = 0; ox < 8 / k; ++ox) {
            double s = 0, mx = -1e9;
            for (int dy = 0; dy < k; ++dy)
              for (int dx = 0; dx < k; ++dx) {
                const double v = x.at(n, c, oy * k + dy, ox * k + dx);
                s += v;
                mx = std::max(mx, v);
              }
            EXPECT_NEAR(a.at(n, c, oy, ox), s / (k * k), 1e-6);
            EXPECT_FLOAT_EQ(m.at(n, c, oy, ox), static_cast<float>(mx));
          }
  }
}

TEST(Pool2dTest, GradientsMatchFiniteDifferences) {
  Rng rng(6);
  Tensor x = random_tensor(rng, Shape{1, 2, 4, 4});
  for (PoolKind k : {PoolKind::kAvg, PoolKind::kMax}) {
    const auto r = grad_check([&] { return pool2d(x, k); }, {x}, 32, 3);
    EXPECT_GE(r.pass_rate(), 0.99) << "worst " << r.worst;
  }
}

TEST(UpsampleTest, ReplicatesBlocks) {
  const Tensor x(Shape{1, 1, 2, 2}, {1, 2, 3, 4});
  expect_close(upsample_nearest(x, 1), x, 0.0);
  const Tensor y = upsample_nearest(x, 2);
  const float expected[16] = {1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
  for (int i = 0; i < 16; ++i) EXPECT_EQ(y.data()[i], expected[i]);
  EXPECT_THROW(upsample_nearest(x, 0), Error);
}

TEST(UpsampleTest, InvertsAveragePoolOnBlockConstantInput) {
  Rng rng(7);
  const Tensor coarse = random_tensor(rng, Shape{2, 3, 3, 4});
  const Tensor fine = upsample_nearest(coarse, 2);
  expect_close(upsample_nearest(pool2d(fine, PoolKind::kAvg), 2), fine, 0.0);
}

TEST(UpsampleTest, GradientsMatchFiniteDifferences) {
  Rng rng(8);
  Tensor x = random_tensor(rng, Shape{1, 2, 3, 3});
  const auto r = grad_check([&] { return upsample_nearest(x, 2); }, {x}, 18, 1);
  EXPECT_GE(r.pass_rate(), 0.99);
}

TEST(ShapeOpsTest, ConcatSliceCropRoundTrip) {
  Rng rng(9);
  const Tensor a = random_tensor(rng, Shape{2, 2, 4, 4});
  const Tensor b = random_tensor(rng, Shape{2, 3, 4, 4});
  const Tensor c = concat_channels({a, b});
  EXPECT_EQ(c.shape(), (Shape{2, 5, 4, 4}));
  EXPECT_EQ(c.at(1, 3, 2, 1), b.at(1, 1, 2, 1));
  const Tensor d = concat_batch({a, a});
  expect_close(slice_batch(d, 2, 2), a, 0.0);
  const Tensor e = crop(a, 1, 2, 2, 2);
  EXPECT_EQ(e.at(1, 1, 1, 1), a.at(1, 1, 2, 3));
  EXPECT_THROW(crop(a, 3, 0, 2, 2), Error);
}

TEST(ShapeOpsTest, GlobalPoolAndBroadcast) {
  const Tensor x(Shape{1, 2, 1, 2}, {1, 3, 5, 7});
  const Tensor g = global_avg_pool(x);
  EXPECT_EQ(g.shape(), (Shape{1, 2}));
  EXPECT_FLOAT_EQ(g.data()[0], 2);
  EXPECT_FLOAT_EQ(g.data()[1], 6);
  const Tensor bsp = broadcast_spatial(g, 2, 3);
  EXPECT_EQ(bsp.shape(), (Shape{1, 2, 2, 3}));
  EXPECT_FLOAT_EQ(bsp.at(0, 1, 1, 2), 6);
}

TEST(ShapeOpsTest, MatmulAndLinearMatchLoops) {
  Rng rng(10);
  const Tensor a = random_tensor(rng, Shape{3, 4});
  const Tensor b = random_tensor(rng, Shape{4, 2});
  const Tensor m = matmul(a, b);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0;
      for (int k = 0; k < 4; ++k) s += a.data()[i * 4 + k] * b.data()[k * 2 + j];
      EXPECT_NEAR(m.data()[i * 2 + j], s, 1e-6);
    }
  const Tensor w = random_tensor(rng, Shape{2, 4});
  const Tensor bias = random_tensor(rng, Shape{2});
  const Tensor l = linear(a, w, bias);
  for (int i = 0; i < 3; ++i)
    for (int o = 0; o < 2; ++o) {
      double s = bias.data()[o];
      for (int k = 0; k < 4; ++k) s += a.data()[i * 4 + k] * w.data()[o * 4 + k];
      EXPECT_NEAR(l.data()[i * 2 + o], s, 1e-6);
    }
}

TEST(ShapeOpsTest, GradientsMatchFiniteDifferences) {
  Rng rng(12);
  Tensor a = random_tensor(rng, Shape{2, 2, 3, 4});
  Tensor b = random_tensor(rng, Shape{2, 1, 3, 4});
  Tensor w = random_tensor(rng, Shape{5, 8});
  Tensor bias = random_tensor(rng, Shape{5});
  Tensor m = random_tensor(rng, Shape{3, 8});
  const std::vector<std::pair<const char*, std::function<Tensor()>>> cases = {
      {"concat_channels", [&] { return concat_channels({a, b}); }},
      {"concat_batch", [&] { return concat_batch({a, a}); }},
      {"slice", [&] { return slice_batch(a, 1, 1); }},
      {"crop", [&] { return crop(a, 1, 1, 2, 2); }},
      {"reshape", [&] { return reshape(a, Shape{6, 8}); }},
      {"global_pool", [&] { return global_avg_pool(a); }},
      {"broadcast", [&] { return broadcast_spatial(global_avg_pool(a), 2, 2); }},
      {"linear", [&] { return linear(m, w, bias); }},
      {"matmul", [&] { return matmul(m, reshape(w, Shape{8, 5})); }},
  };
  for (const auto& [name, fn] : cases) {
    const auto r = grad_check(fn, {a, b, w, bias, m}, 12, 4);
    EXPECT_GE(r.pass_rate(), 0.99) << name << " worst " << r.worst;
  }
}

TEST(AutodiffTest, ToyNetworkGradientsMatchFiniteDifferences) {
  // Two convolutions, a pool and a sigmoid, under 5k parameters.
  Rng rng(13);
  Tensor x = random_tensor(rng, Shape{2, 3, 8, 8}, 0.0, 1.0);
  Tensor w1 = random_tensor(rng, Shape{8, 3, 3, 3}, -0.3, 0.3);
  Tensor b1 = random_tensor(rng, Shape{8}, -0.1, 0.1);
  Tensor w2 = random_tensor(rng, Shape{4, 8, 3, 3}, -0.2, 0.2);
  Tensor b2 = random_tensor(rng, Shape{4}, -0.1, 0.1);
  auto net = [&] {
    Tensor h = conv2d(x, w1, b1, 1, PadMode::kReflect, 1);
    h = pool2d(h, PoolKind::kAvg);
    return mean(sigmoid(conv2d(h, w2, b2, 1, PadMode::kReflect, 1)));
  };
  const auto r = grad_check(net, {w1, b1, w2, b2}, 400, 21);
  EXPECT_GE(r.pass_rate(), 0.99) << "worst " << r.worst;
}

TEST(DeterminismTest, RepeatedOpsAreBitIdentical) {
  Rng rng(14);
  const Tensor x = random_tensor(rng, Shape{2, 4, 8, 8});
  const Tensor w = random_tensor(rng, Shape{6, 4, 3, 3});
  const Tensor a = conv2d(x, w, Tensor(), 1, PadMode::kReflect, 1);
  const Tensor b = conv2d(x, w, Tensor(), 1, PadMode::kReflect, 1);
  ASSERT_EQ(a.data().size(), b.data().size());
  for (std::size_t i = 0; i < a.data().size(); ++i) ASSERT_EQ(a.data()[i], b.data()[i]);
}

}  // namespace
}  // namespace domstyle
