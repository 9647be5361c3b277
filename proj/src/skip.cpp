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

#include "domstyle/skip.hpp"

#include <cmath>
#include <string>

#include "domstyle/error.hpp"
#include "domstyle/ops.hpp"
#include "domstyle/transforms.hpp"

namespace domstyle {

int kernel_size_for(double alpha) {
  check(alpha >= 0.0 && alpha <= 1.0, ErrorCode::kInvalidArgument,
        "domainness must lie in [0, 1], got " + std::to_string(alpha));
  int size = static_cast<int>(std::floor(alpha * 8.0)) + 1;
  if (size % 2 == 0) ++size;
  return size;
}

GaussianKernel gaussian_kernel(int size, double sigma) {
  check(size >= 1 && size % 2 == 1, ErrorCode::kInvalidArgument,
        "gaussian kernel size must be odd and positive");
  check(sigma > 0.0, ErrorCode::kInvalidArgument, "gaussian sigma must be positive");
  GaussianKernel k;
  k.size = size;
  k.sigma = sigma;
  const int r = size / 2;
  std::vector<double> raw(static_cast<std::size_t>(size * size));
  double total = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      raw[static_cast<std::size_t>((dy + r) * size + dx + r)] = v;
      total += v;
    }
  }
  k.weights.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) k.weights[i] = static_cast<float>(raw[i] / total);
  return k;
}

GaussianKernel build_kernel(double alpha) {
  return gaussian_kernel(kernel_size_for(alpha), kSkipBlurSigma);
}

Tensor blur(const Tensor& f, const GaussianKernel& k) {
  check(f.rank() >= 2, ErrorCode::kShapeMismatch, "blur expects at least [H,W]");
  if (k.size == 1 && k.weights[0] == 1.0f) return f.detach();
  const std::int64_t h = f.dim(f.rank() - 2);
  const std::int64_t w = f.dim(f.rank() - 1);
  const std::int64_t planes = f.numel() / (h * w);
  const int r = k.size / 2;
  const std::int64_t pw = w + 2 * r;
  // Reflect-padded copy of one plane, rebuilt per plane.
  std::vector<float> padded(static_cast<std::size_t>((h + 2 * r) * pw));
  std::vector<double> acc(static_cast<std::size_t>(w));
  Tensor out(f.shape());
  auto od = out.mutable_data();
  auto fd = f.data();
  for (std::int64_t p = 0; p < planes; ++p) {
    const float* src = fd.data() + p * h * w;
    float* dst = od.data() + p * h * w;
    for (std::int64_t y = -r; y < h + r; ++y) {
      const float* row = src + detail::reflect_index(y, h) * w;
      float* prow = padded.data() + (y + r) * pw;
      for (std::int64_t x = -r; x < w + r; ++x) prow[x + r] = row[detail::reflect_index(x, w)];
    }
    for (std::int64_t y = 0; y < h; ++y) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int dy = 0; dy < k.size; ++dy) {
        const float* prow = padded.data() + (y + dy) * pw;
        for (int dx = 0; dx < k.size; ++dx) {
          const double kv = k.at(dy, dx);
          const float* s = prow + dx;
          for (std::int64_t x = 0; x < w; ++x) acc[static_cast<std::size_t>(x)] += kv * s[x];
        }
      }
      for (std::int64_t x = 0; x < w; ++x) dst[y * w + x] = static_cast<float>(acc[static_cast<std::size_t>(x)]);
    }
  }
  return out;
}

Tensor low_pass(const Tensor& f) {
  static const GaussianKernel kernel = gaussian_kernel(kLowPassSize, kLowPassSigma);
  return blur(f, kernel);
}

Tensor high_freq(const Tensor& f) {
  const Tensor low = low_pass(f);
  Tensor out(f.shape());
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = f.data()[i] - low.data()[i];
  return out;
}

Tensor domain_aware_skip(const Tensor& f_c, const Tensor& f_s, double alpha) {
  const GaussianKernel k = build_kernel(alpha);
  return blur(high_freq(stat_match(f_c, f_s)), k);
}

}  // namespace domstyle
