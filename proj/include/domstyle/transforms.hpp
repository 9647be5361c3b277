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

#include <cstdint>
#include <vector>

#include "domstyle/linalg.hpp"
#include "domstyle/tensor.hpp"

namespace domstyle {

// Diagonal load added to feature covariances before decomposition.
inline constexpr double kCovarianceEpsilon = 1e-5;
// Eigenvalues are clamped to this floor before taking +-1/2 powers.
inline constexpr double kEigenFloor = 1e-8;
// Standard-deviation floor for per-channel statistic matching.
inline constexpr float kStatEpsilon = 1e-5f;

// Channel-by-channel second moments G = F F^T / (C H W) of a [C,H,W] (or
// single-item [1,C,H,W]) feature map, without mean subtraction.
Matrix gram_matrix(const Tensor& f);

// Differentiable batched gram: [N,C,H,W] -> [N,C,C].
Tensor gram(const Tensor& f);

struct FeatureStats {
  Vector mean;        // per channel
  Matrix covariance;  // (f - mu)(f - mu)^T / (HW - 1) + eps I
  SymEigen eig;
};

// Statistics of one [C, HW] feature block (row-major floats).
FeatureStats feature_stats(const float* f, std::int64_t channels, std::int64_t sites);

// The transforms below accept [C,H,W] or [N,C,H,W]. When the style side has a
// single item it is shared by every content item. None of them record on the
// gradient tape except stat_match.
Tensor whiten(const Tensor& f);
Tensor wct(const Tensor& f_c, const Tensor& f_s);

// Per-channel mean/std alignment. Differentiable with respect to both inputs.
Tensor stat_match(const Tensor& f_c, const Tensor& f_s);

struct PatchMatchResult {
  std::vector<std::int64_t> content_positions;  // top-left y*W+x in content
  std::vector<std::int64_t> best_style_patch;   // index into style patch grid
  std::int64_t style_grid_width = 0;            // patches per style row
};

// Whitened-space patch swap: every content patch is replaced by the style patch
// with the highest normalized cross-correlation, overlaps are averaged and
// the result is recoloured with the style statistics.
Tensor style_decorator(const Tensor& f_c, const Tensor& f_s, int patch = 3, int stride = 1);

// The matching step of style_decorator for one [C,H,W] pair, exposed for tests.
PatchMatchResult style_decorator_matches(const Tensor& f_c, const Tensor& f_s,
                                         int patch = 3, int stride = 1);

// alpha * style_decorator + (1 - alpha) * wct.
Tensor blend_transform(const Tensor& f_c, const Tensor& f_s, double alpha);

}  // namespace domstyle
