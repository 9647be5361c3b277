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

#include <array>
#include <optional>
#include <vector>

#include "domstyle/net_config.hpp"
#include "domstyle/networks.hpp"
#include "domstyle/tensor.hpp"
#include "domstyle/weights.hpp"

namespace domstyle {

struct StylizeRequest {
  Tensor content;  // [3,H,W] or [1,3,H,W]
  Tensor style;
  std::optional<double> alpha_override;  // replaces every alpha_l and the mean
  std::optional<int> resize;             // both images resampled to N x N first
};

struct StylizeResult {
  Tensor image;  // [1,3,H,W]
  Domainness dom;
};

// Decoder inputs derived from content and style activations.
struct DecoderInputs {
  Tensor bottleneck;
  std::array<Tensor, 3> skips;
  std::array<Tensor, 3> shortcuts;
};

// Batch items [start, start + count) of every activation.
EncoderActivations slice_activations(const EncoderActivations& acts, std::int64_t start,
                                     std::int64_t count);

// Item n of content is paired with item n of style (or item 0 when the style
// batch has one item) and transformed with dom[n].
DecoderInputs transform_features(const EncoderActivations& content,
                                 const EncoderActivations& style,
                                 const std::vector<Domainness>& dom);

StylizeResult dstn_forward(const StylizeRequest& req, const WeightStore& ws,
                           const NetConfig& cfg);

}  // namespace domstyle
