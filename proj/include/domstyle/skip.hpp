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

#include <vector>

#include "domstyle/tensor.hpp"

namespace domstyle {

inline constexpr double kSkipBlurSigma = 16.0;
// Fixed low-pass used to split features into low and high frequencies.
inline constexpr int kLowPassSize = 3;
inline constexpr double kLowPassSigma = 1.0;

struct GaussianKernel {
  int size = 1;
  double sigma = kSkipBlurSigma;
  std::vector<float> weights{1.0f};  // size x size, row-major

  float at(int dy, int dx) const { return weights[static_cast<std::size_t>(dy * size + dx)]; }
};

// floor(alpha * 8) + 1, bumped to the next odd size when even.
int kernel_size_for(double alpha);

GaussianKernel gaussian_kernel(int size, double sigma);
GaussianKernel build_kernel(double alpha);

// Depthwise convolution of every channel with k (reflect padding). A size-1
// kernel returns the input values untouched.
Tensor blur(const Tensor& f, const GaussianKernel& k);

Tensor low_pass(const Tensor& f);
// f - low_pass(f)
Tensor high_freq(const Tensor& f);

// blur(high_freq(stat_match(f_c, f_s)), build_kernel(alpha)).
Tensor domain_aware_skip(const Tensor& f_c, const Tensor& f_s, double alpha);

}  // namespace domstyle
