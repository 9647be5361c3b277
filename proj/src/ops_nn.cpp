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

#include <Eigen/Core>
#include <algorithm>
#include <limits>
#include <string>

#include "domstyle/error.hpp"
#include "domstyle/ops.hpp"

namespace domstyle {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

struct ConvGeometry {
  std::int64_t n, cin, h, w, cout, kh, kw, hout, wout;
  int stride, pad;
  PadMode mode;

  std::int64_t patch() const { return cin * kh * kw; }
  std::int64_t sites() const { return hout * wout; }
  bool pointwise() const { return kh == 1 && kw == 1 && stride == 1 && pad == 0; }
};

// Source pixel for a padded coordinate, or -1 for zero padding.
inline std::int64_t source_index(std::int64_t i, std::int64_t n, PadMode mode) {
  if (i >= 0 && i < n) return i;
  if (mode == PadMode::kZero) return -1;
  return detail::reflect_index(i, n);
}

void im2col(const ConvGeometry& g, const float* x, float* col) {
  const std::int64_t sites = g.sites();
  // Column source per (kx, ox); the contiguous interior run is copied whole
  // when stride is 1.
  std::vector<std::int64_t> xs(static_cast<std::size_t>(g.kw * g.wout));
  for (std::int64_t kx = 0; kx < g.kw; ++kx) {
    for (std::int64_t ox = 0; ox < g.wout; ++ox) {
      xs[static_cast<std::size_t>(kx * g.wout + ox)] =
          source_index(ox * g.stride - g.pad + kx, g.w, g.mode);
    }
  }
  for (std::int64_t c = 0; c < g.cin; ++c) {
    const float* xc = x + c * g.h * g.w;
    for (std::int64_t ky = 0; ky < g.kh; ++ky) {
      for (std::int64_t kx = 0; kx < g.kw; ++kx) {
        float* row = col + ((c * g.kh + ky) * g.kw + kx) * sites;
        const std::int64_t* table = xs.data() + kx * g.wout;
        const std::int64_t lo = g.stride == 1 ? std::clamp<std::int64_t>(g.pad - kx, 0, g.wout) : 0;
        const std::int64_t hi =
            g.stride == 1 ? std::clamp<std::int64_t>(g.w + g.pad - kx, lo, g.wout) : 0;
        for (std::int64_t oy = 0; oy < g.hout; ++oy) {
          const std::int64_t iy = source_index(oy * g.stride - g.pad + ky, g.h, g.mode);
          float* dst = row + oy * g.wout;
          if (iy < 0) {
            std::fill(dst, dst + g.wout, 0.0f);
            continue;
          }
          const float* src = xc + iy * g.w;
          if (hi > lo) {
            std::copy(src + lo - g.pad + kx, src + hi - g.pad + kx, dst + lo);
            for (std::int64_t ox = 0; ox < lo; ++ox) dst[ox] = table[ox] < 0 ? 0.0f : src[table[ox]];
            for (std::int64_t ox = hi; ox < g.wout; ++ox) {
              dst[ox] = table[ox] < 0 ? 0.0f : src[table[ox]];
            }
          } else {
            for (std::int64_t ox = 0; ox < g.wout; ++ox) {
              dst[ox] = table[ox] < 0 ? 0.0f : src[table[ox]];
            }
          }
        }
      }
    }
  }
}

void col2im(const ConvGeometry& g, const float* col, float* x) {
  const std::int64_t sites = g.sites();
  for (std::int64_t c = 0; c < g.cin; ++c) {
    float* xc = x + c * g.h * g.w;
    for (std::int64_t ky = 0; ky < g.kh; ++ky) {
      for (std::int64_t kx = 0; kx < g.kw; ++kx) {
        const float* row = col + ((c * g.kh + ky) * g.kw + kx) * sites;
        for (std::int64_t oy = 0; oy < g.hout; ++oy) {
          const std::int64_t iy = source_index(oy * g.stride - g.pad + ky, g.h, g.mode);
          if (iy < 0) continue;
          const float* src = row + oy * g.wout;
          float* dst = xc + iy * g.w;
          for (std::int64_t ox = 0; ox < g.wout; ++ox) {
            const std::int64_t ix = source_index(ox * g.stride - g.pad + kx, g.w, g.mode);
            if (ix >= 0) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
              PadMode pad, int pad_size) {
  check(x.rank() == 4 && w.rank() == 4, ErrorCode::kShapeMismatch,
        "conv2d expects x:[N,C,H,W] and w:[Cout,Cin,kh,kw]");
  check(stride >= 1 && pad_size >= 0, ErrorCode::kInvalidArgument,
        "conv2d: stride must be >= 1 and padding >= 0");
  ConvGeometry g{};
  g.n = x.dim(0);
  g.cin = x.dim(1);
  g.h = x.dim(2);
  g.w = x.dim(3);
  g.cout = w.dim(0);
  g.kh = w.dim(2);
  g.kw = w.dim(3);
  g.stride = stride;
  g.pad = pad_size;
  g.mode = pad;
  check(w.dim(1) == g.cin, ErrorCode::kShapeMismatch,
        "conv2d: input has " + std::to_string(g.cin) + " channels, kernel expects " +
            std::to_string(w.dim(1)));
  check(g.kh % 2 == 1 && g.kw % 2 == 1, ErrorCode::kInvalidArgument,
        "conv2d: kernel extents must be odd");
  if (b.defined()) {
    check(b.numel() == g.cout, ErrorCode::kShapeMismatch,
          "conv2d: bias length does not match output channels");
  }
  const std::int64_t span_h = g.h + 2 * g.pad - g.kh;
  const std::int64_t span_w = g.w + 2 * g.pad - g.kw;
  check(span_h >= 0 && span_w >= 0, ErrorCode::kShapeMismatch,
        "conv2d: kernel larger than padded input " + shape_to_string(x.shape()));
  g.hout = span_h / stride + 1;
  g.wout = span_w / stride + 1;

  Tensor out(Shape{g.n, g.cout, g.hout, g.wout});
  const std::int64_t k = g.patch();
  const std::int64_t sites = g.sites();
  std::vector<float> col(g.pointwise() ? 0 : static_cast<std::size_t>(k * sites));
  ConstMapMat wm(w.data().data(), g.cout, k);
  auto od = out.mutable_data();
  for (std::int64_t n = 0; n < g.n; ++n) {
    const float* xn = x.data().data() + n * g.cin * g.h * g.w;
    const float* cm = xn;
    if (!g.pointwise()) {
      im2col(g, xn, col.data());
      cm = col.data();
    }
    MapMat om(od.data() + n * g.cout * sites, g.cout, sites);
    om.noalias() = wm * ConstMapMat(cm, k, sites);
    if (b.defined()) {
      for (std::int64_t c = 0; c < g.cout; ++c) om.row(c).array() += b.data()[c];
    }
  }
  detail::check_finite(out, "conv2d");

  if (detail::should_record({&x, &w, &b})) {
    GradTape::active()->record(out, [g, x, w, b](std::span<const float> go) mutable {
      const std::int64_t k = g.patch();
      const std::int64_t sites = g.sites();
      ConstMapMat wm(w.data().data(), g.cout, k);
      std::vector<float> col(static_cast<std::size_t>(k * sites));
      std::vector<float> gw(w.requires_grad() ? w.data().size() : 0, 0.0f);
      std::vector<float> gx(x.requires_grad() ? x.data().size() : 0, 0.0f);
      std::vector<double> gb(b.defined() && b.requires_grad() ? g.cout : 0, 0.0);
      for (std::int64_t n = 0; n < g.n; ++n) {
        ConstMapMat gom(go.data() + n * g.cout * sites, g.cout, sites);
        const float* xn = x.data().data() + n * g.cin * g.h * g.w;
        if (!gw.empty()) {
          const float* cm = xn;
          if (!g.pointwise()) {
            im2col(g, xn, col.data());
            cm = col.data();
          }
          MapMat(gw.data(), g.cout, k).noalias() += gom * ConstMapMat(cm, k, sites).transpose();
        }
        if (!gx.empty()) {
          float* gxn = gx.data() + n * g.cin * g.h * g.w;
          if (g.pointwise()) {
            MapMat(gxn, k, sites).noalias() += wm.transpose() * gom;
          } else {
            MapMat(col.data(), k, sites).noalias() = wm.transpose() * gom;
            col2im(g, col.data(), gxn);
          }
        }
        for (std::size_t c = 0; c < gb.size(); ++c) {
          gb[c] += gom.row(static_cast<std::int64_t>(c)).cast<double>().sum();
        }
      }
      if (!gw.empty()) w.accumulate_grad(gw);
      if (!gx.empty()) x.accumulate_grad(gx);
      if (!gb.empty()) {
        b.accumulate_grad(std::vector<float>(gb.begin(), gb.end()));
      }
    });
  }
  return out;
}

Tensor pool2d(const Tensor& x, PoolKind kind, int k, int stride) {
  check(x.rank() == 4, ErrorCode::kShapeMismatch, "pool2d expects [N,C,H,W]");
  check(k >= 1 && stride >= 1, ErrorCode::kInvalidArgument,
        "pool2d: window and stride must be >= 1");
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  check(h >= k && w >= k && (h - k) % stride == 0 && (w - k) % stride == 0 &&
            h % stride == 0 && w % stride == 0,
        ErrorCode::kShapeMismatch,
        "pool2d: extent " + shape_to_string(x.shape()) + " not divisible by stride " +
            std::to_string(stride));
  const std::int64_t ho = (h - k) / stride + 1, wo = (w - k) / stride + 1;
  Tensor out(Shape{n, c, ho, wo});
  auto od = out.mutable_data();
  auto xd = x.data();
  std::vector<std::int64_t> argmax(kind == PoolKind::kMax ? od.size() : 0);
  const double inv = 1.0 / static_cast<double>(k * k);
  for (std::int64_t p = 0; p < n * c; ++p) {
    const float* src = xd.data() + p * h * w;
    for (std::int64_t oy = 0; oy < ho; ++oy) {
      for (std::int64_t ox = 0; ox < wo; ++ox) {
        const std::int64_t o = (p * ho + oy) * wo + ox;
        if (kind == PoolKind::kAvg) {
          double acc = 0.0;
          for (int dy = 0; dy < k; ++dy)
            for (int dx = 0; dx < k; ++dx)
              acc += src[(oy * stride + dy) * w + ox * stride + dx];
          od[o] = static_cast<float>(acc * inv);
        } else {
          float best = -std::numeric_limits<float>::infinity();
          std::int64_t at = 0;
          for (int dy = 0; dy < k; ++dy) {
            for (int dx = 0; dx < k; ++dx) {
              const std::int64_t idx = (oy * stride + dy) * w + ox * stride + dx;
              if (src[idx] > best) {
                best = src[idx];
                at = p * h * w + idx;
              }
            }
          }
          od[o] = best;
          argmax[o] = at;
        }
      }
    }
  }
  if (detail::should_record({&x})) {
    GradTape::active()->record(out, [x, kind, k, stride, n, c, h, w, ho, wo, inv,
                                     argmax = std::move(argmax)](
                                        std::span<const float> go) mutable {
      std::vector<float> gx(x.data().size(), 0.0f);
      for (std::int64_t p = 0; p < n * c; ++p) {
        for (std::int64_t oy = 0; oy < ho; ++oy) {
          for (std::int64_t ox = 0; ox < wo; ++ox) {
            const std::int64_t o = (p * ho + oy) * wo + ox;
            if (kind == PoolKind::kMax) {
              gx[argmax[o]] += go[o];
              continue;
            }
            const float share = static_cast<float>(go[o] * inv);
            for (int dy = 0; dy < k; ++dy)
              for (int dx = 0; dx < k; ++dx)
                gx[p * h * w + (oy * stride + dy) * w + ox * stride + dx] += share;
          }
        }
      }
      x.accumulate_grad(gx);
    });
  }
  return out;
}

Tensor upsample_nearest(const Tensor& x, int factor) {
  check(x.rank() == 4, ErrorCode::kShapeMismatch, "upsample expects [N,C,H,W]");
  check(factor >= 1, ErrorCode::kInvalidArgument, "upsample factor must be >= 1");
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t ho = h * factor, wo = w * factor;
  Tensor out(Shape{n, c, ho, wo});
  auto od = out.mutable_data();
  auto xd = x.data();
  for (std::int64_t p = 0; p < n * c; ++p) {
    for (std::int64_t oy = 0; oy < ho; ++oy) {
      const float* src = xd.data() + (p * h + oy / factor) * w;
      float* dst = od.data() + (p * ho + oy) * wo;
      for (std::int64_t ox = 0; ox < wo; ++ox) dst[ox] = src[ox / factor];
    }
  }
  if (detail::should_record({&x})) {
    GradTape::active()->record(out, [x, factor, n, c, h, w, ho, wo](
                                        std::span<const float> go) mutable {
      std::vector<float> gx(x.data().size(), 0.0f);
      for (std::int64_t p = 0; p < n * c; ++p)
        for (std::int64_t oy = 0; oy < ho; ++oy)
          for (std::int64_t ox = 0; ox < wo; ++ox)
            gx[(p * h + oy / factor) * w + ox / factor] += go[(p * ho + oy) * wo + ox];
      x.accumulate_grad(gx);
    });
  }
  return out;
}

Tensor global_avg_pool(const Tensor& x) {
  check(x.rank() == 4, ErrorCode::kShapeMismatch, "global_avg_pool expects [N,C,H,W]");
  const std::int64_t nc = x.dim(0) * x.dim(1);
  const std::int64_t hw = x.dim(2) * x.dim(3);
  Tensor out(Shape{x.dim(0), x.dim(1)});
  auto od = out.mutable_data();
  auto xd = x.data();
  for (std::int64_t p = 0; p < nc; ++p) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < hw; ++i) acc += xd[p * hw + i];
    od[p] = static_cast<float>(acc / static_cast<double>(hw));
  }
  if (detail::should_record({&x})) {
    GradTape::active()->record(out, [x, nc, hw](std::span<const float> go) mutable {
      std::vector<float> gx(x.data().size());
      for (std::int64_t p = 0; p < nc; ++p) {
        const float share = static_cast<float>(go[p] / static_cast<double>(hw));
        std::fill(gx.begin() + p * hw, gx.begin() + (p + 1) * hw, share);
      }
      x.accumulate_grad(gx);
    });
  }
  return out;
}

Tensor broadcast_spatial(const Tensor& x, std::int64_t h, std::int64_t w) {
  check(x.rank() == 2, ErrorCode::kShapeMismatch, "broadcast_spatial expects [N,C]");
  const std::int64_t nc = x.numel();
  const std::int64_t hw = h * w;
  Tensor out(Shape{x.dim(0), x.dim(1), h, w});
  auto od = out.mutable_data();
  auto xd = x.data();
  for (std::int64_t p = 0; p < nc; ++p) {
    std::fill(od.begin() + p * hw, od.begin() + (p + 1) * hw, xd[p]);
  }
  if (detail::should_record({&x})) {
    GradTape::active()->record(out, [x, nc, hw](std::span<const float> go) mutable {
      std::vector<float> gx(static_cast<std::size_t>(nc));
      for (std::int64_t p = 0; p < nc; ++p) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < hw; ++i) acc += go[p * hw + i];
        gx[p] = static_cast<float>(acc);
      }
      x.accumulate_grad(gx);
    });
  }
  return out;
}

}  // namespace domstyle
