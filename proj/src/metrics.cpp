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

#include <algorithm>
#include <cmath>
#include <string>

#include "domstyle/error.hpp"
#include "domstyle/losses.hpp"
#include "domstyle/ops.hpp"
#include "domstyle/transforms.hpp"

namespace domstyle {
namespace {

Tensor as_batch(const Tensor& image, const char* what) {
  if (image.rank() == 3) return reshape(image, Shape{1, image.dim(0), image.dim(1), image.dim(2)});
  check(image.rank() == 4 && image.dim(0) == 1, ErrorCode::kShapeMismatch,
        std::string(what) + " expects a single [C,H,W] or [1,C,H,W] image");
  return image;
}

double gram_distance(const Tensor& a, const Tensor& b) {
  const Matrix ga = gram_matrix(a);
  const Matrix gb = gram_matrix(b);
  return (ga - gb).squaredNorm() / static_cast<double>(ga.size());
}

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size * size));
  const int r = size / 2;
  double total = 0.0;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double v = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
      w[static_cast<std::size_t>((y + r) * size + x + r)] = v;
      total += v;
    }
  }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

int style_metric_crop(std::int64_t height, std::int64_t width) {
  const std::int64_t extent = std::min(height, width);
  check(extent >= 32, ErrorCode::kInvalidArgument,
        "style loss metric needs images of at least 32x32");
  return extent >= 128 ? 128 : 32;
}

double metric_style_loss(const Tensor& output, const Tensor& style, const WeightStore& ws,
                         const NetConfig& cfg) {
  const Tensor o = as_batch(output, "metric_style_loss").detach();
  const Tensor s = as_batch(style, "metric_style_loss").detach();
  const int crop_size = std::min(style_metric_crop(o.dim(2), o.dim(3)),
                                 style_metric_crop(s.dim(2), s.dim(3)));
  auto corners = [crop_size](const Tensor& t) {
    const std::int64_t h = t.dim(2) - crop_size, w = t.dim(3) - crop_size;
    return std::vector<std::pair<std::int64_t, std::int64_t>>{
        {0, 0}, {0, w}, {h, 0}, {h, w}, {h / 2, w / 2}};
  };
  const auto po = corners(o);
  const auto ps = corners(s);
  double total = 0.0;
  for (std::size_t k = 0; k < po.size(); ++k) {
    const EncoderActivations a =
        encode(crop(o, po[k].first, po[k].second, crop_size, crop_size), ws, cfg);
    const EncoderActivations b =
        encode(crop(s, ps[k].first, ps[k].second, crop_size, crop_size), ws, cfg);
    total += gram_distance(a.s1, b.s1) + gram_distance(a.s2, b.s2) +
             gram_distance(a.s3, b.s3) + gram_distance(a.f4, b.f4);
  }
  return total / static_cast<double>(po.size());
}

std::vector<double> grayscale(const Tensor& image, std::int64_t* height, std::int64_t* width) {
  const Tensor x = as_batch(image, "grayscale");
  const std::int64_t c = x.dim(1), h = x.dim(2), w = x.dim(3);
  check(c == 1 || c == 3, ErrorCode::kShapeMismatch, "grayscale expects 1 or 3 channels");
  *height = h;
  *width = w;
  const std::size_t plane = static_cast<std::size_t>(h * w);
  const auto d = x.data();
  std::vector<double> out(plane);
  for (std::size_t i = 0; i < plane; ++i) {
    out[i] = c == 1 ? d[i]
                    : 0.299 * d[i] + 0.587 * d[plane + i] + 0.114 * d[2 * plane + i];
  }
  return out;
}

std::vector<double> sobel_magnitude(const std::vector<double>& plane, std::int64_t height,
                                    std::int64_t width) {
  std::vector<double> out(plane.size());
  auto px = [&](std::int64_t y, std::int64_t x) {
    return plane[static_cast<std::size_t>(detail::reflect_index(y, height) * width +
                                          detail::reflect_index(x, width))];
  };
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      const double gx = (px(y - 1, x + 1) + 2.0 * px(y, x + 1) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y, x - 1) + px(y + 1, x - 1));
      const double gy = (px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y - 1, x) + px(y - 1, x + 1));
      out[static_cast<std::size_t>(y * width + x)] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

double ssim(const std::vector<double>& a, const std::vector<double>& b, std::int64_t height,
            std::int64_t width, double dynamic_range) {
  constexpr int kWindow = 11;
  check(height >= kWindow && width >= kWindow, ErrorCode::kInvalidArgument,
        "ssim needs images of at least 11x11");
  check(a.size() == b.size() && a.size() == static_cast<std::size_t>(height * width),
        ErrorCode::kShapeMismatch, "ssim planes differ in size");
  const std::vector<double> win = gaussian_window(kWindow, 1.5);
  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  double total = 0.0;
  std::int64_t count = 0;
  for (std::int64_t y = 0; y + kWindow <= height; ++y) {
    for (std::int64_t x = 0; x + kWindow <= width; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int dy = 0; dy < kWindow; ++dy) {
        for (int dx = 0; dx < kWindow; ++dx) {
          const double wt = win[static_cast<std::size_t>(dy * kWindow + dx)];
          const std::size_t i = static_cast<std::size_t>((y + dy) * width + x + dx);
          ma += wt * a[i];
          mb += wt * b[i];
          saa += wt * a[i] * a[i];
          sbb += wt * b[i] * b[i];
          sab += wt * a[i] * b[i];
        }
      }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double metric_edge_ssim(const Tensor& output, const Tensor& content) {
  std::int64_t h = 0, w = 0, hc = 0, wc = 0;
  const std::vector<double> go = grayscale(output, &h, &w);
  const std::vector<double> gc = grayscale(content, &hc, &wc);
  check(h == hc && w == wc, ErrorCode::kShapeMismatch,
        "metric_edge_ssim: output and content sizes differ");
  const std::vector<double> eo = sobel_magnitude(go, h, w);
  const std::vector<double> ec = sobel_magnitude(gc, h, w);
  double range = 0.0;
  for (double v : eo) range = std::max(range, v);
  for (double v : ec) range = std::max(range, v);
  if (range == 0.0) range = 1.0;
  return ssim(eo, ec, h, w, range);
}

}  // namespace domstyle
