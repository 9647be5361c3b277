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
#include <cstdint>
#include <string>

#include "domstyle/net_config.hpp"
#include "domstyle/tensor.hpp"
#include "domstyle/weights.hpp"

namespace domstyle {

struct EncoderActivations {
  Tensor f1, f2, f3, f4;  // conv1_2, conv2_2, conv3_4, conv4_1 (post-relu)
  Tensor s1, s2, s3;      // conv1_1, conv2_1, conv3_1 (post-relu)

  const Tensor& tap(int level) const;       // f1..f3 by 1-based level
  const Tensor& shortcut(int level) const;  // s1..s3 by 1-based level
};

struct Domainness {
  std::array<float, 3> alpha_levels{};
  float alpha_mean = 0.0f;

  static Domainness uniform(float alpha);
};

// Per-level sigmoid outputs for a batch; each level tensor is [N].
struct DomainnessBatch {
  std::array<Tensor, 3> levels;

  std::int64_t batch() const { return levels[0].numel(); }
  Domainness item(std::int64_t n) const;
};

// Weight names, shared by initialisation and the forward passes.
std::string encoder_conv_name(int stage, int index);
std::string decoder_conv_name(int stage, int index);

// Random initialisation (Kaiming-uniform fan-in weights, zero biases) of one
// component: "encoder", "decoder", "indicator" or "discriminator".
void init_component(WeightStore& ws, const std::string& component, const NetConfig& cfg,
                    std::uint64_t seed);
WeightStore init_weights(const NetConfig& cfg, std::uint64_t seed);

// Number of parameters of a component under cfg, derived from the layout.
std::int64_t expected_parameter_count(const std::string& component, const NetConfig& cfg);

// Recovers the architecture widths from a populated store.
NetConfig infer_config(const WeightStore& ws);

EncoderActivations encode(const Tensor& image, const WeightStore& ws, const NetConfig& cfg);

// skips[l] are added at the mirrored conv{l}_last position, shortcuts[l]
// renormalise the mirrored conv{l}_1 position (per-channel statistic match).
Tensor decode(const Tensor& bottleneck, const std::array<Tensor, 3>& skips,
              const std::array<Tensor, 3>& shortcuts, const WeightStore& ws,
              const NetConfig& cfg);

DomainnessBatch indicator_forward(const Tensor& image, const WeightStore& ws,
                                  const NetConfig& cfg);
DomainnessBatch indicator_from_features(const EncoderActivations& acts,
                                        const WeightStore& ws, const NetConfig& cfg);

// One logit per batch item: mean of the spatial means of the block-1, block-3
// and final patch-logit maps.
Tensor discriminator_forward(const Tensor& image, const WeightStore& ws);

}  // namespace domstyle
