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
#include "domstyle/linalg.hpp"
#include "domstyle/random.hpp"

namespace domstyle {
namespace {

Matrix random_symmetric(Rng& rng, int n) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.uniform(-1, 1);
  return a;
}

TEST(EigSymTest, IdentityAndDiagonal) {
  const SymEigen id = eig_sym(Matrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(id.values(i), 1.0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = 3;
  const SymEigen e = eig_sym(d);
  EXPECT_DOUBLE_EQ(e.values(0), 3);
  EXPECT_DOUBLE_EQ(e.values(1), 1);
  EXPECT_DOUBLE_EQ(std::abs(e.vectors(1, 0)), 1.0);
  EXPECT_DOUBLE_EQ(std::abs(e.vectors(0, 1)), 1.0);
}

TEST(EigSymTest, TwoByTwoMatchesCharacteristicPolynomial) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const Matrix a = random_symmetric(rng, 2);
    const double tr = a(0, 0) + a(1, 1);
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double disc = std::sqrt(tr * tr / 4 - det);
    const SymEigen e = eig_sym(a);
    EXPECT_NEAR(e.values(0), tr / 2 + disc, 1e-6);
    EXPECT_NEAR(e.values(1), tr / 2 - disc, 1e-6);
  }
}

TEST(EigSymTest, ResidualOrthonormalityAndReconstruction) {
  Rng rng(2);
  for (int n : {1, 5, 17, 64}) {
    const Matrix a = random_symmetric(rng, n);
    const SymEigen e = eig_sym(a);
    const double norm = std::max(1.0, a.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < n; ++i) {
      const Vector r = a * e.vectors.col(i) - e.values(i) * e.vectors.col(i);
      EXPECT_LE(r.lpNorm<Eigen::Infinity>(), 1e-5 * norm);
      if (i > 0) EXPECT_GE(e.values(i - 1), e.values(i));
    }
    EXPECT_LE((e.vectors.transpose() * e.vectors - Matrix::Identity(n, n))
                  .lpNorm<Eigen::Infinity>(),
              1e-5);
    const Matrix rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LE((rec - a).lpNorm<Eigen::Infinity>(), 1e-5 * a.lpNorm<Eigen::Infinity>());
  }
}

TEST(EigSymTest, SymmetrizesSmallAsymmetryRejectsLarge) {
  Matrix a(2, 2);
  a << 2, 1, 1 + 1e-8, 2;
  const SymEigen e = eig_sym(a);
  EXPECT_NEAR(e.values(0), 3.0, 1e-7);
  a(1, 0) = 1.5;
  EXPECT_THROW(eig_sym(a), Error);
}

TEST(EigSymTest, ReportsExhaustedSweepBudget) {
  Rng rng(3);
  const Matrix a = random_symmetric(rng, 12);
  try {
    eig_sym(a, 1);
    FAIL() << "one sweep cannot diagonalise a dense 12x12 matrix";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoConvergence);
  }
}

TEST(EigSymTest, DeterministicSigns) {
  Rng rng(4);
  const Matrix a = random_symmetric(rng, 6);
  const SymEigen x = eig_sym(a);
  const SymEigen y = eig_sym(a);
  EXPECT_EQ((x.vectors - y.vectors).lpNorm<Eigen::Infinity>(), 0.0);
}

}  // namespace
}  // namespace domstyle
