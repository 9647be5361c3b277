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

namespace domstyle {

// Conv layers per encoder stage: conv1_1..1_2, conv2_1..2_2, conv3_1..3_4,
// conv4_1 (VGG-19 layout truncated at conv4_1).
inline constexpr std::array<int, 4> kStageConvCounts{2, 2, 4, 1};

struct NetConfig {
  std::array<int, 4> stage_channels{64, 128, 256, 512};
  int indicator_pool_channels = 64;   // width of the 1x1 "structure" branch
  int indicator_gram_embed = 64;      // width of the gram-embedding branch
  int indicator_fc_hidden = 256;
  int indicator_head_channels = 64;
  std::array<int, 4> discriminator_channels{64, 128, 256, 512};

  static NetConfig full();
  static NetConfig toy();
  static NetConfig preset(const std::string& name);

  void validate() const;
  bool operator==(const NetConfig&) const = default;
};

}  // namespace domstyle
