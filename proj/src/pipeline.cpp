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

#include "domstyle/pipeline.hpp"

#include <string>

#include "domstyle/error.hpp"
#include "domstyle/image.hpp"
#include "domstyle/ops.hpp"
#include "domstyle/skip.hpp"
#include "domstyle/transforms.hpp"

namespace domstyle {
namespace {

Tensor as_batch(const Tensor& image, const char* what) {
  check(image.defined(), ErrorCode::kInvalidArgument, std::string(what) + " image missing");
  if (image.rank() == 3) {
    return reshape(image, Shape{1, image.dim(0), image.dim(1), image.dim(2)});
  }
  check(image.rank() == 4 && image.dim(0) == 1, ErrorCode::kShapeMismatch,
        std::string(what) + " must be [3,H,W] or [1,3,H,W], got " +
            shape_to_string(image.shape()));
  return image;
}

}  // namespace

EncoderActivations slice_activations(const EncoderActivations& acts, std::int64_t start,
                                     std::int64_t count) {
  EncoderActivations out;
  out.f1 = slice_batch(acts.f1, start, count);
  out.f2 = slice_batch(acts.f2, start, count);
  out.f3 = slice_batch(acts.f3, start, count);
  out.f4 = slice_batch(acts.f4, start, count);
  out.s1 = slice_batch(acts.s1, start, count);
  out.s2 = slice_batch(acts.s2, start, count);
  out.s3 = slice_batch(acts.s3, start, count);
  return out;
}

DecoderInputs transform_features(const EncoderActivations& content,
                                 const EncoderActivations& style,
                                 const std::vector<Domainness>& dom) {
  const std::int64_t n = content.f4.dim(0);
  const std::int64_t ns = style.f4.dim(0);
  check(ns == 1 || ns == n, ErrorCode::kShapeMismatch,
        "style batch must have one item or match the content batch");
  check(static_cast<std::int64_t>(dom.size()) == n, ErrorCode::kShapeMismatch,
        "one domainness per content item is required");
  std::vector<Tensor> bottleneck;
  std::array<std::vector<Tensor>, 3> skips, shortcuts;
  for (std::int64_t i = 0; i < n; ++i) {
    const EncoderActivations c = n == 1 ? content : slice_activations(content, i, 1);
    const EncoderActivations s = ns == 1 ? style : slice_activations(style, i, 1);
    const Domainness& d = dom[static_cast<std::size_t>(i)];
    bottleneck.push_back(blend_transform(c.f4, s.f4, d.alpha_mean));
    for (int l = 1; l <= 3; ++l) {
      const auto li = static_cast<std::size_t>(l - 1);
      skips[li].push_back(domain_aware_skip(c.tap(l), s.tap(l), d.alpha_levels[li]));
      shortcuts[li].push_back(stat_match(c.shortcut(l), s.shortcut(l)));
    }
  }
  DecoderInputs out;
  out.bottleneck = n == 1 ? bottleneck[0] : concat_batch(bottleneck);
  for (std::size_t l = 0; l < 3; ++l) {
    out.skips[l] = n == 1 ? skips[l][0] : concat_batch(skips[l]);
    out.shortcuts[l] = n == 1 ? shortcuts[l][0] : concat_batch(shortcuts[l]);
  }
  return out;
}

StylizeResult dstn_forward(const StylizeRequest& req, const WeightStore& ws,
                           const NetConfig& cfg) {
  Tensor content = as_batch(req.content, "content");
  Tensor style = as_batch(req.style, "style");
  check(content.dim(1) == 3 && style.dim(1) == 3, ErrorCode::kShapeMismatch,
        "content and style must be 3-channel images");
  if (req.resize) {
    check(*req.resize >= 8 && *req.resize % 8 == 0, ErrorCode::kInvalidArgument,
          "resize must be a positive multiple of 8, got " + std::to_string(*req.resize));
    content = resize_bilinear(content, *req.resize, *req.resize);
    style = resize_bilinear(style, *req.resize, *req.resize);
  }
  const EncoderActivations ca = encode(content, ws, cfg);
  const EncoderActivations sa = encode(style, ws, cfg);
  StylizeResult out;
  if (req.alpha_override) {
    const double a = *req.alpha_override;
    check(a >= 0.0 && a <= 1.0, ErrorCode::kInvalidArgument,
          "alpha override must lie in [0, 1], got " + std::to_string(a));
    out.dom = Domainness::uniform(static_cast<float>(a));
  } else {
    out.dom = indicator_from_features(sa, ws, cfg).item(0);
  }
  const DecoderInputs in = transform_features(ca, sa, {out.dom});
  out.image = decode(in.bottleneck, in.skips, in.shortcuts, ws, cfg);
  return out;
}

}  // namespace domstyle
