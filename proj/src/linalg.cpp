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

#include "domstyle/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "domstyle/error.hpp"

namespace domstyle {
namespace {

double inf_norm(const Matrix& a) {
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

double off_diagonal_sq(const Matrix& a) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) acc += a(i, j) * a(i, j);
  return acc;
}

}  // namespace

SymEigen eig_sym(const Matrix& input, int max_sweeps) {
  check(input.rows() == input.cols() && input.rows() >= 1, ErrorCode::kShapeMismatch,
        "eig_sym needs a non-empty square matrix");
  check(input.rows() <= kEigMaxDimension, ErrorCode::kInvalidArgument,
        "eig_sym dimension " + std::to_string(input.rows()) + " exceeds " +
            std::to_string(kEigMaxDimension));
  check(input.allFinite(), ErrorCode::kNonFinite, "eig_sym input is not finite");
  const double scale = std::max(1.0, inf_norm(input));
  const double asym = (input - input.transpose()).cwiseAbs().maxCoeff();
  check(asym <= 1e-6 * scale, ErrorCode::kInvalidArgument,
        "eig_sym input is not symmetric (max |A - A^T| = " + std::to_string(asym) + ")");

  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double total = a.squaredNorm();
  const double tol = 1e-26 * std::max(total, 1e-300);

  bool converged = off_diagonal_sq(a) <= tol;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_diagonal_sq(a) <= tol;
  }
  if (!converged) {
    fail(ErrorCode::kNoConvergence,
         "eig_sym did not converge within " + std::to_string(max_sweeps) + " sweeps");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  SymEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    out.values(i) = a(src, src);
    Vector col = v.col(src);
    // Deterministic sign: largest-magnitude component positive.
    Eigen::Index at = 0;
    col.cwiseAbs().maxCoeff(&at);
    if (col(at) < 0.0) col = -col;
    out.vectors.col(i) = col;
  }
  return out;
}

}  // namespace domstyle
