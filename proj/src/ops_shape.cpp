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
#include <string>

#include "domstyle/error.hpp"
#include "domstyle/ops.hpp"

namespace domstyle {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

// Copies `count` contiguous blocks of `block` floats between strided layouts.
void copy_blocks(const float* src, std::int64_t src_stride, float* dst,
                 std::int64_t dst_stride, std::int64_t count, std::int64_t block) {
  for (std::int64_t i = 0; i < count; ++i) {
    std::copy(src + i * src_stride, src + i * src_stride + block, dst + i * dst_stride);
  }
}

}  // namespace

Tensor reshape(const Tensor& x, Shape shape) {
  check(shape_numel(shape) == x.numel(), ErrorCode::kShapeMismatch,
        "reshape " + shape_to_string(x.shape()) + " -> " + shape_to_string(shape));
  Tensor out(std::move(shape),
             std::vector<float>(x.data().begin(), x.data().end()));
  if (detail::should_record({&x})) {
    GradTape::active()->record(out, [x](std::span<const float> go) mutable {
      x.accumulate_grad(go);
    });
  }
  return out;
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
  check(!parts.empty(), ErrorCode::kInvalidArgument, "concat of nothing");
  const auto& s0 = parts[0].shape();
  check(s0.size() == 4, ErrorCode::kShapeMismatch, "concat_channels expects [N,C,H,W]");
  std::int64_t channels = 0;
  for (const auto& p : parts) {
    const auto& s = p.shape();
    check(s.size() == 4 && s[0] == s0[0] && s[2] == s0[2] && s[3] == s0[3],
          ErrorCode::kShapeMismatch,
          "concat_channels: " + shape_to_string(s) + " vs " + shape_to_string(s0));
    channels += s[1];
  }
  const std::int64_t n = s0[0], hw = s0[2] * s0[3];
  Tensor out(Shape{n, channels, s0[2], s0[3]});
  float* od = out.mutable_data().data();
  std::int64_t offset = 0;
  for (const auto& p : parts) {
    const std::int64_t block = p.dim(1) * hw;
    copy_blocks(p.data().data(), block, od + offset * hw, channels * hw, n, block);
    offset += p.dim(1);
  }
  if (detail::should_record(parts)) {
    GradTape::active()->record(out, [parts, n, hw, channels](
                                        std::span<const float> go) mutable {
      std::int64_t offset = 0;
      for (auto& p : parts) {
        const std::int64_t block = p.dim(1) * hw;
        if (p.requires_grad()) {
          std::vector<float> g(p.data().size());
          copy_blocks(go.data() + offset * hw, channels * hw, g.data(), block, n, block);
          p.accumulate_grad(g);
        }
        offset += p.dim(1);
      }
    });
  }
  return out;
}

Tensor concat_batch(const std::vector<Tensor>& parts) {
  check(!parts.empty(), ErrorCode::kInvalidArgument, "concat of nothing");
  Shape shape = parts[0].shape();
  std::int64_t batch = 0;
  for (const auto& p : parts) {
    Shape s = p.shape();
    check(s.size() == shape.size() && !s.empty(), ErrorCode::kShapeMismatch,
          "concat_batch rank mismatch");
    batch += s[0];
    s[0] = shape[0];
    check(s == shape, ErrorCode::kShapeMismatch,
          "concat_batch: " + shape_to_string(p.shape()) + " vs " +
              shape_to_string(parts[0].shape()));
  }
  shape[0] = batch;
  std::vector<float> values;
  values.reserve(static_cast<std::size_t>(shape_numel(shape)));
  for (const auto& p : parts) values.insert(values.end(), p.data().begin(), p.data().end());
  Tensor out(shape, std::move(values));
  if (detail::should_record(parts)) {
    GradTape::active()->record(out, [parts](std::span<const float> go) mutable {
      std::size_t offset = 0;
      for (auto& p : parts) {
        const std::size_t len = p.data().size();
        if (p.requires_grad()) p.accumulate_grad(go.subspan(offset, len));
        offset += len;
      }
    });
  }
  return out;
}

Tensor slice_batch(const Tensor& x, std::int64_t start, std::int64_t count) {
  check(x.rank() >= 1 && start >= 0 && count >= 1 && start + count <= x.dim(0),
        ErrorCode::kShapeMismatch,
        "slice_batch [" + std::to_string(start) + ", +" + std::to_string(count) +
            ") out of range for " + shape_to_string(x.shape()));
  Shape shape = x.shape();
  const std::int64_t item = x.numel() / shape[0];
  shape[0] = count;
  auto begin = x.data().begin() + start * item;
  Tensor out(shape, std::vector<float>(begin, begin + count * item));
  if (detail::should_record({&x})) {
    GradTape::active()->record(out, [x, start, item](std::span<const float> go) mutable {
      std::vector<float> g(x.data().size(), 0.0f);
      std::copy(go.begin(), go.end(), g.begin() + start * item);
      x.accumulate_grad(g);
    });
  }
  return out;
}

Tensor crop(const Tensor& x, std::int64_t top, std::int64_t left, std::int64_t height,
            std::int64_t width) {
  check(x.rank() == 4, ErrorCode::kShapeMismatch, "crop expects [N,C,H,W]");
  const std::int64_t h = x.dim(2), w = x.dim(3);
  check(top >= 0 && left >= 0 && height >= 1 && width >= 1 && top + height <= h &&
            left + width <= w,
        ErrorCode::kShapeMismatch, "crop window outside " + shape_to_string(x.shape()));
  const std::int64_t planes = x.dim(0) * x.dim(1);
  Tensor out(Shape{x.dim(0), x.dim(1), height, width});
  float* od = out.mutable_data().data();
  const float* xd = x.data().data();
  for (std::int64_t p = 0; p < planes; ++p) {
    copy_blocks(xd + p * h * w + top * w + left, w, od + p * height * width, width,
                height, width);
  }
  if (detail::should_record({&x})) {
    GradTape::active()->record(out, [x, top, left, height, width, planes, h, w](
                                        std::span<const float> go) mutable {
      std::vector<float> g(x.data().size(), 0.0f);
      for (std::int64_t p = 0; p < planes; ++p) {
        copy_blocks(go.data() + p * height * width, width,
                    g.data() + p * h * w + top * w + left, w, height, width);
      }
      x.accumulate_grad(g);
    });
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0),
        ErrorCode::kShapeMismatch,
        "matmul " + shape_to_string(a.shape()) + " x " + shape_to_string(b.shape()));
  const std::int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out(Shape{m, n});
  MapMat(out.mutable_data().data(), m, n).noalias() =
      ConstMapMat(a.data().data(), m, k) * ConstMapMat(b.data().data(), k, n);
  detail::check_finite(out, "matmul");
  if (detail::should_record({&a, &b})) {
    GradTape::active()->record(out, [a, b, m, k, n](std::span<const float> go) mutable {
      ConstMapMat g(go.data(), m, n);
      if (a.requires_grad()) {
        std::vector<float> ga(static_cast<std::size_t>(m * k));
        MapMat(ga.data(), m, k).noalias() =
            g * ConstMapMat(b.data().data(), k, n).transpose();
        a.accumulate_grad(ga);
      }
      if (b.requires_grad()) {
        std::vector<float> gb(static_cast<std::size_t>(k * n));
        MapMat(gb.data(), k, n).noalias() =
            ConstMapMat(a.data().data(), m, k).transpose() * g;
        b.accumulate_grad(gb);
      }
    });
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  check(x.rank() == 2 && w.rank() == 2 && x.dim(1) == w.dim(1),
        ErrorCode::kShapeMismatch,
        "linear " + shape_to_string(x.shape()) + " with weight " +
            shape_to_string(w.shape()));
  const std::int64_t n = x.dim(0), in = x.dim(1), outf = w.dim(0);
  if (b.defined()) {
    check(b.numel() == outf, ErrorCode::kShapeMismatch, "linear bias length");
  }
  Tensor out(Shape{n, outf});
  MapMat om(out.mutable_data().data(), n, outf);
  om.noalias() = ConstMapMat(x.data().data(), n, in) *
                 ConstMapMat(w.data().data(), outf, in).transpose();
  if (b.defined()) {
    for (std::int64_t r = 0; r < n; ++r) {
      om.row(r) += Eigen::Map<const Eigen::RowVectorXf>(b.data().data(), outf);
    }
  }
  detail::check_finite(out, "linear");
  if (detail::should_record({&x, &w, &b})) {
    GradTape::active()->record(out, [x, w, b, n, in, outf](
                                        std::span<const float> go) mutable {
      ConstMapMat g(go.data(), n, outf);
      if (x.requires_grad()) {
        std::vector<float> gx(static_cast<std::size_t>(n * in));
        MapMat(gx.data(), n, in).noalias() = g * ConstMapMat(w.data().data(), outf, in);
        x.accumulate_grad(gx);
      }
      if (w.requires_grad()) {
        std::vector<float> gw(static_cast<std::size_t>(outf * in));
        MapMat(gw.data(), outf, in).noalias() =
            g.transpose() * ConstMapMat(x.data().data(), n, in);
        w.accumulate_grad(gw);
      }
      if (b.defined() && b.requires_grad()) {
        std::vector<float> gb(static_cast<std::size_t>(outf));
        for (std::int64_t c = 0; c < outf; ++c) {
          gb[c] = static_cast<float>(g.col(c).cast<double>().sum());
        }
        b.accumulate_grad(gb);
      }
    });
  }
  return out;
}

}  // namespace domstyle
