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

// Brute-force references shared by the unit tests and the acceptance run.
// They are written without the library's kernels and stay frozen.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "domstyle/linalg.hpp"
#include "domstyle/ops.hpp"
#include "domstyle/random.hpp"
#include "domstyle/tensor.hpp"

namespace domstyle::testing {

// Direct six-loop convolution, written independently of the im2col path.
inline Tensor naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, int stride, PadMode pad,
                  int p) {
  const auto n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const auto cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const auto ho = (h + 2 * p - kh) / stride + 1, wo = (wd + 2 * p - kw) / stride + 1;
  Tensor out(Shape{n, cout, ho, wo});
  auto pixel = [&](std::int64_t bi, std::int64_t c, std::int64_t y, std::int64_t xx) -> double {
    if (pad == PadMode::kZero) {
      if (y < 0 || y >= h || xx < 0 || xx >= wd) return 0.0;
    } else {
      if (y < 0) y = -y;
      if (y >= h) y = 2 * (h - 1) - y;
      if (xx < 0) xx = -xx;
      if (xx >= wd) xx = 2 * (wd - 1) - xx;
    }
    return x.at(bi, c, y, xx);
  };
  for (std::int64_t bi = 0; bi < n; ++bi)
    for (std::int64_t o = 0; o < cout; ++o)
      for (std::int64_t oy = 0; oy < ho; ++oy)
        for (std::int64_t ox = 0; ox < wo; ++ox) {
          double acc = b.defined() ? b.data()[o] : 0.0;
          for (std::int64_t c = 0; c < cin; ++c)
            for (std::int64_t ky = 0; ky < kh; ++ky)
              for (std::int64_t kx = 0; kx < kw; ++kx)
                acc += w.at(o, c, ky, kx) *
                       pixel(bi, c, oy * stride - p + ky, ox * stride - p + kx);
          out.mutable_data()[((bi * cout + o) * ho + oy) * wo + ox] = static_cast<float>(acc);
        }
  return out;
}

// [C, HW] view of a [C,H,W] tensor in double.
inline Matrix as_rows(const Tensor& f) {
  const auto c = f.dim(f.rank() - 3);
  const auto sites = f.dim(f.rank() - 2) * f.dim(f.rank() - 1);
  Matrix m(c, sites);
  for (std::int64_t i = 0; i < c; ++i)
    for (std::int64_t j = 0; j < sites; ++j) m(i, j) = f.data()[i * sites + j];
  return m;
}

inline Matrix plain_covariance(const Matrix& x) {
  const Matrix centred = x.colwise() - x.rowwise().mean();
  return centred * centred.transpose() / static_cast<double>(x.cols() - 1);
}

// Correlated features: Gaussian noise mixed by I + a bounded random term
// (singular values stay within ~[0.5, 1.5], far above the diagonal load),
// per-channel scales and an offset.
inline Tensor correlated_features(Rng& rng, std::int64_t c, std::int64_t h, std::int64_t w) {
  Matrix mix = Matrix::Identity(c, c);
  for (std::int64_t i = 0; i < c; ++i)
    for (std::int64_t j = 0; j < c; ++j) mix(i, j) += 0.25 * rng.normal() / std::sqrt(double(c));
  for (std::int64_t i = 0; i < c; ++i) mix.row(i) *= rng.uniform(0.5, 2.0);
  Matrix noise(c, h * w);
  for (std::int64_t i = 0; i < c; ++i)
    for (std::int64_t j = 0; j < h * w; ++j) noise(i, j) = rng.normal();
  Matrix f = mix * noise;
  std::vector<float> v(static_cast<std::size_t>(c * h * w));
  for (std::int64_t i = 0; i < c; ++i) {
    const double offset = rng.uniform(-2, 2);
    for (std::int64_t j = 0; j < h * w; ++j) v[i * h * w + j] = float(f(i, j) + offset);
  }
  return Tensor(Shape{c, h, w}, std::move(v));
}

// Whitening with Eigen's own solver, the patch grid enumerated directly and
// every pair scored: the reference for style_decorator_matches.
inline std::vector<std::int64_t> brute_force_matches(const Tensor& fc, const Tensor& fs, int patch) {
  auto whitened = [](const Tensor& f) {
    const Matrix x = as_rows(f);
    Matrix cov = plain_covariance(x);
    cov.diagonal().array() += 1e-5;
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    const Vector inv = es.eigenvalues().unaryExpr([](double v) { return 1.0 / std::sqrt(std::max(v, 1e-8)); });
    return Matrix(es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() *
                  (x.colwise() - x.rowwise().mean()));
  };
  const Matrix wc = whitened(fc), ws = whitened(fs);
  const auto c = fc.dim(0), hc = fc.dim(1), wdc = fc.dim(2), hs = fs.dim(1), wds = fs.dim(2);
  auto patch_vec = [&](const Matrix& m, std::int64_t width, std::int64_t y, std::int64_t x) {
    Vector v(c * patch * patch);
    int k = 0;
    for (std::int64_t ch = 0; ch < c; ++ch)
      for (int dy = 0; dy < patch; ++dy)
        for (int dx = 0; dx < patch; ++dx) v(k++) = m(ch, (y + dy) * width + x + dx);
    return v;
  };
  std::vector<std::int64_t> best;
  for (std::int64_t y = 0; y + patch <= hc; ++y)
    for (std::int64_t x = 0; x + patch <= wdc; ++x) {
      const Vector cp = patch_vec(wc, wdc, y, x);
      double top = -1e300;
      std::int64_t at = -1, idx = 0;
      for (std::int64_t sy = 0; sy + patch <= hs; ++sy)
        for (std::int64_t sx = 0; sx + patch <= wds; ++sx, ++idx) {
          const Vector sp = patch_vec(ws, wds, sy, sx);
          const double score = cp.dot(sp) / (cp.norm() * std::max(sp.norm(), 1e-8));
          if (score > top) {
            top = score;
            at = idx;
          }
        }
      best.push_back(at);
    }
  return best;
}

// Mean of f_i . f_j over C*H*W, summed in double.
inline Matrix naive_gram(const Tensor& f) {
  const auto c = f.dim(0), sites = f.dim(1) * f.dim(2);
  Matrix g(c, c);
  for (std::int64_t i = 0; i < c; ++i)
    for (std::int64_t j = 0; j < c; ++j) {
      double s = 0;
      for (std::int64_t k = 0; k < sites; ++k)
        s += double(f.data()[i * sites + k]) * f.data()[j * sites + k];
      g(i, j) = s / double(c * sites);
    }
  return g;
}

// Roots of the characteristic polynomial, larger first.
inline std::pair<double, double> eig2_oracle(const Matrix& a) {
  const double tr = a(0, 0) + a(1, 1);
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const double disc = std::sqrt(std::max(tr * tr / 4 - det, 0.0));
  return {tr / 2 + disc, tr / 2 - disc};
}

}  // namespace domstyle::testing
