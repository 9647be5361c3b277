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
#include "domstyle/skip.hpp"
#include "domstyle/transforms.hpp"
#include "support/test_util.hpp"

namespace domstyle {
namespace {

using testing::random_tensor;

double energy(const Tensor& t) {
  double s = 0;
  for (float v : t.data()) s += double(v) * v;
  return s;
}

int odd_size(double alpha) {
  int s = static_cast<int>(std::floor(alpha * 8.0)) + 1;
  return s % 2 == 0 ? s + 1 : s;
}

TEST(KernelTest, SizeFollowsStepTableAtBreakpoints) {
  const double alphas[] = {0.0, 0.124, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0};
  const int expected[] = {1, 1, 3, 3, 5, 5, 7, 7, 9, 9};
  for (int i = 0; i < 10; ++i) {
    const GaussianKernel k = build_kernel(alphas[i]);
    EXPECT_EQ(k.size, expected[i]) << "alpha " << alphas[i];
    EXPECT_EQ(k.size, odd_size(alphas[i]));
    EXPECT_EQ(k.sigma, 16.0);
  }
  EXPECT_EQ(kernel_size_for(0.2), 3);  // floor(1.6) + 1 = 2, rounded up to odd
}

TEST(KernelTest, WeightsNormalisedAndSymmetric) {
  for (double a = 0.0; a <= 1.0; a += 0.0625) {
    const GaussianKernel k = build_kernel(a);
    double total = 0;
    for (float w : k.weights) total += w;
    EXPECT_NEAR(total, 1.0, 1e-6);
    for (int y = 0; y < k.size; ++y)
      for (int x = 0; x < k.size; ++x) {
        EXPECT_EQ(k.at(y, x), k.at(k.size - 1 - y, k.size - 1 - x));
        EXPECT_EQ(k.at(y, x), k.at(x, y));
      }
  }
}

TEST(KernelTest, DocumentedExamples) {
  EXPECT_EQ(build_kernel(1.0).size, 9);
  const GaussianKernel one = build_kernel(0.0);
  ASSERT_EQ(one.weights.size(), 1u);
  EXPECT_EQ(one.weights[0], 1.0f);
  const GaussianKernel five = build_kernel(0.5);
  ASSERT_EQ(five.size, 5);
  const auto [lo, hi] = std::minmax_element(five.weights.begin(), five.weights.end());
  // exp(8 / 512) is the corner-to-centre ratio for radius 2 and sigma 16.
  EXPECT_NEAR(*hi / *lo, std::exp(8.0 / 512.0), 1e-5);
  EXPECT_LT(*hi / *lo, 1.02);
}

TEST(KernelTest, RejectsOutOfRangeAlpha) {
  EXPECT_THROW(build_kernel(-0.01), Error);
  EXPECT_THROW(build_kernel(1.01), Error);
  EXPECT_THROW(gaussian_kernel(4, 1.0), Error);
}

TEST(BlurTest, SizeOneIsBitExactIdentity) {
  Rng rng(1);
  const Tensor f = random_tensor(rng, Shape{2, 3, 5, 6});
  const Tensor y = blur(f, build_kernel(0.0));
  for (std::size_t i = 0; i < f.data().size(); ++i) ASSERT_EQ(y.data()[i], f.data()[i]);
}

TEST(BlurTest, ConstantInputUnchanged) {
  const Tensor f(Shape{1, 2, 7, 7}, 0.7f);
  for (double a : {0.3, 0.6, 1.0}) {
    const Tensor y = blur(f, build_kernel(a));
    for (float v : y.data()) EXPECT_NEAR(v, 0.7f, 1e-6);
  }
}

TEST(BlurTest, ImpulseStampsKernel) {
  Tensor f(Shape{1, 1, 11, 11}, 0.0f);
  f.mutable_data()[5 * 11 + 5] = 1.0f;
  const GaussianKernel k = build_kernel(1.0);
  const Tensor y = blur(f, k);
  for (int dy = -4; dy <= 4; ++dy)
    for (int dx = -4; dx <= 4; ++dx) {
      EXPECT_NEAR(y.at(0, 0, 5 + dy, 5 + dx), k.at(dy + 4, dx + 4), 1e-7);
    }
}

TEST(BlurTest, ReflectBordersMatchDirectSum) {
  Rng rng(2);
  const Tensor f = random_tensor(rng, Shape{1, 1, 6, 5});
  const GaussianKernel k = gaussian_kernel(5, 1.3);
  const Tensor y = blur(f, k);
  auto mirror = [](int i, int n) { return i < 0 ? -i : (i >= n ? 2 * (n - 1) - i : i); };
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 5; ++c) {
      double acc = 0;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx)
          acc += k.at(dy + 2, dx + 2) * f.at(0, 0, mirror(r + dy, 6), mirror(c + dx, 5));
      EXPECT_NEAR(y.at(0, 0, r, c), acc, 1e-6);
    }
}

TEST(BlurTest, Linear) {
  Rng rng(3);
  const Tensor f = random_tensor(rng, Shape{1, 2, 9, 9});
  const Tensor g = random_tensor(rng, Shape{1, 2, 9, 9});
  const GaussianKernel k = build_kernel(0.8);
  const Tensor lhs = blur(add(scale(f, 0.3f), scale(g, -1.7f)), k);
  const Tensor rhs = add(scale(blur(f, k), 0.3f), scale(blur(g, k), -1.7f));
  for (std::size_t i = 0; i < lhs.data().size(); ++i) EXPECT_NEAR(lhs.data()[i], rhs.data()[i], 1e-5);
}

TEST(HighFreqTest, ConstantsHaveNoHighFrequency) {
  const Tensor f(Shape{1, 3, 8, 8}, -1.25f);
  const Tensor hf = high_freq(f);
  for (float v : hf.data()) EXPECT_LE(std::abs(v), 1e-6);
}

TEST(HighFreqTest, SplitRecombinesExactly) {
  // hf + (f - hf) reproduces f bit for bit whenever |hf| <= |f|. When the
  // high-frequency part dominates, float cannot hold the low bits of f in
  // either term and the recombination is within one ulp of |hf|.
  Rng rng(4);
  const Tensor f = random_tensor(rng, Shape{2, 4, 16, 16}, -3, 3);
  const Tensor hf = high_freq(f);
  const Tensor rest = sub(f, hf);
  const Tensor back = add(hf, rest);
  int exact_domain = 0;
  for (std::size_t i = 0; i < f.data().size(); ++i) {
    const float h = hf.data()[i], v = f.data()[i];
    if (std::abs(h) <= std::abs(v)) {
      ++exact_domain;
      ASSERT_EQ(back.data()[i], v) << "at " << i;
    } else {
      ASSERT_LE(std::abs(back.data()[i] - v), std::nextafter(std::abs(h), INFINITY) - std::abs(h));
    }
  }
  EXPECT_GT(exact_domain, static_cast<int>(f.data().size()) / 2);
  const Tensor smooth(Shape{1, 1, 4, 4}, 0.5f);
  const Tensor hs = high_freq(smooth);
  const Tensor back_smooth = add(hs, sub(smooth, hs));
  for (float v : back_smooth.data()) EXPECT_EQ(v, 0.5f);
}

TEST(HighFreqTest, StepEdgeResponseStaysAtTheEdge) {
  // Rows 0-1 dark, rows 2-3 bright: every row touches the edge.
  Tensor small(Shape{1, 1, 4, 4}, 0.0f);
  for (int i = 8; i < 16; ++i) small.mutable_data()[i] = 1.0f;
  const Tensor hs = high_freq(small);
  double edge = 0;
  for (float v : hs.data()) edge += std::abs(v);
  EXPECT_GT(edge, 0.1);

  Tensor big(Shape{1, 1, 8, 8}, 0.0f);
  for (int i = 32; i < 64; ++i) big.mutable_data()[i] = 1.0f;
  const Tensor hb = high_freq(big);
  double off = 0, on = 0;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) {
      const double v = std::abs(hb.at(0, 0, r, c));
      (r == 3 || r == 4 ? on : off) += v;
    }
  EXPECT_LT(off, 1e-6);
  EXPECT_GT(on, 1.0);
}

TEST(DomainAwareSkipTest, EndpointsAndIdentity) {
  Rng rng(5);
  const Tensor fc = random_tensor(rng, Shape{1, 4, 16, 16});
  const Tensor fs = random_tensor(rng, Shape{1, 4, 16, 16}, -2, 3);
  const Tensor p0 = domain_aware_skip(fc, fs, 0.0);
  const Tensor ref = high_freq(stat_match(fc, fs));
  for (std::size_t i = 0; i < ref.data().size(); ++i) ASSERT_EQ(p0.data()[i], ref.data()[i]);
  EXPECT_LT(energy(domain_aware_skip(fc, fs, 1.0)), energy(p0));
  const Tensor self = domain_aware_skip(fc, fc, 0.0);
  const Tensor hf = high_freq(fc);
  for (std::size_t i = 0; i < hf.data().size(); ++i) EXPECT_NEAR(self.data()[i], hf.data()[i], 1e-5);
}

TEST(DomainAwareSkipTest, PayloadEnergyNonIncreasingInKernelSize) {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const Tensor f = high_freq(random_tensor(rng, Shape{1, 3, 16, 16}));
    double previous = energy(f);
    for (int size : {3, 5, 7, 9}) {
      const double e = energy(blur(f, gaussian_kernel(size, kSkipBlurSigma)));
      EXPECT_LE(e, previous) << "size " << size;
      previous = e;
    }
  }
}

}  // namespace
}  // namespace domstyle
