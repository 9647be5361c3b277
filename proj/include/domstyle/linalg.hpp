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

#pragma once

#include <Eigen/Core>

namespace domstyle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymEigen {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns, vectors.col(i) pairs with values(i)
};

inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr int kEigMaxDimension = 512;

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Inputs asymmetric by
// more than 1e-6 (relative to max(1, |A|_inf)) are rejected; the rest are
// symmetrized as (A + A^T) / 2 before iterating.
SymEigen eig_sym(const Matrix& a, int max_sweeps = kJacobiMaxSweeps);

}  // namespace domstyle
