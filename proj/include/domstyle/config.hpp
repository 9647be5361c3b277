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

#include <filesystem>
#include <string>

#include <json.hpp>

#include "domstyle/net_config.hpp"
#include "domstyle/trainer.hpp"

namespace domstyle {

// File names written inside a training output directory.
struct OutputNames {
  std::string weights = "weights.bin";
  std::string log = "train_log.tsv";
  std::string config = "effective_config.json";
  std::string summary = "train_summary.json";
  bool operator==(const OutputNames&) const = default;
};

struct RunConfig {
  NetConfig net = NetConfig::toy();
  TrainConfig train;
  OutputNames outputs;

  // Preset architecture with the matching training defaults.
  static RunConfig defaults(const std::string& preset);
  void validate() const;
};

// Keys absent from the document keep the preset defaults; unknown keys and
// wrongly typed values are rejected with kConfig.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

// Fully populated document; parse_run_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace domstyle
