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

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "domstyle/error.hpp"
#include "domstyle/ops.hpp"
#include "domstyle/transforms.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

namespace domstyle {
namespace {

using testing::grad_check;
using testing::as_rows;
using testing::brute_force_matches;
using testing::correlated_features;
using testing::plain_covariance;
using testing::random_tensor;

TEST(GramTest, MatchesTripleLoop) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const std::int64_t c = rng.uniform_int(1, 6), h = rng.uniform_int(1, 5),
                       w = rng.uniform_int(1, 5);
    const Tensor f = random_tensor(rng, Shape{c, h, w});
    const Matrix g = gram_matrix(f);
    for (std::int64_t i = 0; i < c; ++i)
      for (std::int64_t j = 0; j < c; ++j) {
        double s = 0;
        for (std::int64_t k = 0; k < h * w; ++k) s += double(f.data()[i * h * w + k]) * f.data()[j * h * w + k];
        ASSERT_NEAR(g(i, j), s / double(c * h * w), 1e-6);
      }
    const Tensor batched = gram(reshape(f, Shape{1, c, h, w}));
    for (std::int64_t i = 0; i < c * c; ++i) ASSERT_NEAR(batched.data()[i], g(i / c, i % c), 1e-6);
  }
}

TEST(GramTest, GradientMatchesFiniteDifferences) {
  Rng rng(2);
  Tensor f = random_tensor(rng, Shape{2, 3, 4, 4});
  const auto r = grad_check([&] { return gram(f); }, {f}, 96, 1);
  EXPECT_GE(r.pass_rate(), 0.99) << "worst " << r.worst;
}

TEST(WhitenTest, OutputCovarianceIsIdentity) {
  Rng rng(3);
  const Tensor f = correlated_features(rng, 8, 10, 10);
  const Matrix cov = plain_covariance(as_rows(whiten(f)));
  EXPECT_LE((cov - Matrix::Identity(8, 8)).lpNorm<Eigen::Infinity>(), 1e-3);
}

TEST(WctTest, OutputCarriesStyleStatistics) {
  Rng rng(4);
  for (std::int64_t c : {4, 16, 64}) {
    const Tensor fc = correlated_features(rng, c, 16, 16);
    const Tensor fs = correlated_features(rng, c, 12, 16);
    const Matrix out = as_rows(wct(fc, fs));
    const Matrix style = as_rows(fs);
    const Matrix cs = plain_covariance(style);
    EXPECT_LE((plain_covariance(out) - cs).norm() / cs.norm(), 5e-3) << "C=" << c;
    EXPECT_LE((out.rowwise().mean() - style.rowwise().mean()).lpNorm<Eigen::Infinity>(), 1e-4);
    EXPECT_EQ(wct(fc, fs).shape(), fc.shape());
  }
}

TEST(WctTest, SelfTransferIsIdentity) {
  Rng rng(5);
  const Tensor f = correlated_features(rng, 6, 8, 8);
  const Tensor y = wct(f, f);
  for (std::size_t i = 0; i < f.data().size(); ++i) EXPECT_NEAR(y.data()[i], f.data()[i], 1e-3);
}

TEST(WctTest, BatchedStyleBroadcastsAndRejectsMismatch) {
  Rng rng(6);
  const Tensor fc = random_tensor(rng, Shape{2, 3, 4, 4});
  const Tensor fs = random_tensor(rng, Shape{1, 3, 4, 4});
  const Tensor y = wct(fc, fs);
  EXPECT_EQ(y.shape(), fc.shape());
  const Tensor single = wct(slice_batch(fc, 1, 1), fs);
  for (std::int64_t i = 0; i < single.numel(); ++i) {
    EXPECT_EQ(y.data()[static_cast<std::size_t>(single.numel() + i)], single.data()[i]);
  }
  EXPECT_THROW(wct(fc, random_tensor(rng, Shape{1, 4, 4, 4})), Error);
}

TEST(StatMatchTest, MatchesPerChannelMoments) {
  Rng rng(7);
  const Tensor fc = random_tensor(rng, Shape{4, 6, 6});
  const Tensor fs = random_tensor(rng, Shape{4, 5, 7}, -3, 5);
  const Matrix out = as_rows(stat_match(fc, fs));
  const Matrix style = as_rows(fs);
  for (int c = 0; c < 4; ++c) {
    const double mo = out.row(c).mean(), ms = style.row(c).mean();
    const double so = std::sqrt((out.row(c).array() - mo).square().mean());
    const double ss = std::sqrt((style.row(c).array() - ms).square().mean());
    EXPECT_NEAR(mo, ms, 1e-5);
    EXPECT_NEAR(so, ss, 1e-4);
  }
  const Tensor same = stat_match(fc, fc);
  for (std::size_t i = 0; i < fc.data().size(); ++i) EXPECT_NEAR(same.data()[i], fc.data()[i], 1e-5);
}

TEST(StatMatchTest, GradientsMatchFiniteDifferences) {
  Rng rng(8);
  Tensor fc = random_tensor(rng, Shape{2, 3, 4, 4});
  Tensor fs = random_tensor(rng, Shape{2, 3, 3, 3}, -2, 2);
  const auto r = grad_check([&] { return stat_match(fc, fs); }, {fc, fs}, 60, 2);
  EXPECT_GE(r.pass_rate(), 0.99) << "worst " << r.worst;
}

TEST(StyleDecoratorTest, PatchMatchesAgreeWithBruteForce) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const std::int64_t c = rng.uniform_int(2, 4);
    const Tensor fc = correlated_features(rng, c, rng.uniform_int(4, 7), rng.uniform_int(4, 7));
    const Tensor fs = correlated_features(rng, c, rng.uniform_int(4, 7), rng.uniform_int(4, 7));
    const PatchMatchResult m = style_decorator_matches(fc, fs);
    EXPECT_EQ(m.best_style_patch, brute_force_matches(fc, fs, 3)) << "instance " << t;
    EXPECT_EQ(m.style_grid_width, fs.dim(2) - 2);
  }
}

TEST(StyleDecoratorTest, SelfDecorationIsIdentity) {
  Rng rng(10);
  const Tensor f = correlated_features(rng, 4, 8, 8);
  const Tensor y = style_decorator(f, f);
  for (std::size_t i = 0; i < f.data().size(); ++i) EXPECT_NEAR(y.data()[i], f.data()[i], 1e-3);
}

TEST(StyleDecoratorTest, OutputCarriesStyleMean) {
  Rng rng(11);
  const Tensor fc = correlated_features(rng, 4, 8, 8);
  const Tensor fs = correlated_features(rng, 4, 6, 6);
  const Tensor y = style_decorator(fc, fs);
  EXPECT_EQ(y.shape(), fc.shape());
  EXPECT_LE((as_rows(y).rowwise().mean() - as_rows(fs).rowwise().mean()).lpNorm<Eigen::Infinity>(),
            0.5);
  EXPECT_THROW(style_decorator(fc, fs, 2), Error);
}

TEST(BlendTest, EndpointsAndAffineInterior) {
  Rng rng(12);
  const Tensor fc = correlated_features(rng, 4, 8, 8);
  const Tensor fs = correlated_features(rng, 4, 8, 8);
  const Tensor w = wct(fc, fs);
  const Tensor sd = style_decorator(fc, fs);
  const Tensor b0 = blend_transform(fc, fs, 0.0);
  const Tensor b1 = blend_transform(fc, fs, 1.0);
  for (std::size_t i = 0; i < w.data().size(); ++i) {
    ASSERT_EQ(b0.data()[i], w.data()[i]);
    ASSERT_EQ(b1.data()[i], sd.data()[i]);
  }
  for (double a : {0.25, 0.5, 0.8}) {
    const Tensor b = blend_transform(fc, fs, a);
    const float fa = static_cast<float>(a), fb = static_cast<float>(1.0 - a);
    for (std::size_t i = 0; i < w.data().size(); ++i) {
      ASSERT_EQ(b.data()[i], fa * sd.data()[i] + fb * w.data()[i]);
    }
  }
  const Tensor half = blend_transform(fc, fs, 0.5);
  for (std::size_t i = 0; i < w.data().size(); ++i) {
    EXPECT_NEAR(half.data()[i], 0.5 * (w.data()[i] + sd.data()[i]), 1e-6);
  }
  EXPECT_THROW(blend_transform(fc, fs, 1.5), Error);
  EXPECT_THROW(blend_transform(fc, fs, -0.1), Error);
}

}  // namespace
}  // namespace domstyle
