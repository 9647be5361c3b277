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

#include "domstyle/net_config.hpp"

#include "domstyle/error.hpp"

namespace domstyle {

NetConfig NetConfig::full() { return NetConfig{}; }

NetConfig NetConfig::toy() {
  NetConfig cfg;
  cfg.stage_channels = {16, 32, 48, 64};
  cfg.indicator_pool_channels = 32;
  cfg.indicator_gram_embed = 32;
  cfg.indicator_fc_hidden = 256;
  cfg.indicator_head_channels = 32;
  cfg.discriminator_channels = {16, 32, 32, 64};
  return cfg;
}

NetConfig NetConfig::preset(const std::string& name) {
  if (name == "full") return full();
  if (name == "toy") return toy();
  fail(ErrorCode::kConfig, "unknown preset '" + name + "' (expected toy or full)");
}

void NetConfig::validate() const {
  for (std::size_t i = 0; i < stage_channels.size(); ++i) {
    check(stage_channels[i] > 0, ErrorCode::kConfig, "stage channels must be positive");
    if (i > 0) {
      check(stage_channels[i] > stage_channels[i - 1], ErrorCode::kConfig,
            "stage channels must be strictly increasing");
    }
  }
  for (int c : discriminator_channels) {
    check(c > 0, ErrorCode::kConfig, "discriminator channels must be positive");
  }
  check(indicator_pool_channels > 0 && indicator_gram_embed > 0 &&
            indicator_fc_hidden > 0 && indicator_head_channels > 0,
        ErrorCode::kConfig, "indicator widths must be positive");
}

}  // namespace domstyle
