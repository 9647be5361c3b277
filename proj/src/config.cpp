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

#include "domstyle/config.hpp"

#include <set>
#include <string>
#include <vector>

#include "domstyle/error.hpp"
#include "domstyle/image.hpp"

namespace domstyle {
namespace {

using nlohmann::json;

// Toy runs use batch 2 and a larger step size than the full preset so the
// 2000-step desk schedule converges.
constexpr int kToyBatch = 2;
constexpr double kToyLearningRate = 1e-3;

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  check(obj.is_object(), ErrorCode::kConfig, where + " must be an object");
  for (const auto& item : obj.items()) {
    check(allowed.count(item.key()) != 0, ErrorCode::kConfig,
          "unknown config key '" + where + (where.empty() ? "" : ".") + item.key() + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kConfig, "config key '" + where + "." + key + "' has the wrong type");
  }
}

void read_int(const json& obj, const char* key, const std::string& where, int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  check(v.is_number_integer(), ErrorCode::kConfig,
        "config key '" + where + "." + key + "' must be an integer");
  out = v.get<int>();
}

void read_seed(const json& obj, const char* key, std::uint64_t& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  check(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0),
        ErrorCode::kConfig, std::string("config key '") + key +
                                "' must be a non-negative integer");
  out = v.get<std::uint64_t>();
}

void read_channels(const json& obj, const char* key, const std::string& where,
                   std::array<int, 4>& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  check(v.is_array() && v.size() == 4, ErrorCode::kConfig,
        "config key '" + where + "." + key + "' must be a list of 4 integers");
  for (std::size_t i = 0; i < 4; ++i) {
    check(v[i].is_number_integer(), ErrorCode::kConfig,
          "config key '" + where + "." + key + "' must be a list of 4 integers");
    out[i] = v[i].get<int>();
  }
}

}  // namespace

RunConfig RunConfig::defaults(const std::string& preset) {
  RunConfig cfg;
  cfg.net = NetConfig::preset(preset);
  cfg.train.preset = preset;
  if (preset == "toy") {
    cfg.train.batch = kToyBatch;
    cfg.train.lr = kToyLearningRate;
  }
  return cfg;
}

void RunConfig::validate() const {
  net.validate();
  train.validate();
  for (const std::string* name : {&outputs.weights, &outputs.log, &outputs.config,
                                  &outputs.summary}) {
    const std::filesystem::path p(*name);
    check(!name->empty() && p.filename() == p && *name != "." && *name != "..",
          ErrorCode::kConfig, "output names must be plain file names, got '" + *name + "'");
  }
}

RunConfig parse_run_config(const json& doc) {
  reject_unknown(doc, "", {"preset", "seed", "net", "train", "loss_weights", "outputs"});
  std::string preset = "toy";
  read(doc, "preset", "", preset);
  RunConfig cfg = RunConfig::defaults(preset);
  read_seed(doc, "seed", cfg.train.seed);

  if (doc.contains("net")) {
    const json& n = doc.at("net");
    reject_unknown(n, "net",
                   {"stage_channels", "indicator_pool_channels", "indicator_gram_embed",
                    "indicator_fc_hidden", "indicator_head_channels",
                    "discriminator_channels"});
    read_channels(n, "stage_channels", "net", cfg.net.stage_channels);
    read_int(n, "indicator_pool_channels", "net", cfg.net.indicator_pool_channels);
    read_int(n, "indicator_gram_embed", "net", cfg.net.indicator_gram_embed);
    read_int(n, "indicator_fc_hidden", "net", cfg.net.indicator_fc_hidden);
    read_int(n, "indicator_head_channels", "net", cfg.net.indicator_head_channels);
    read_channels(n, "discriminator_channels", "net", cfg.net.discriminator_channels);
  }
  if (doc.contains("train")) {
    const json& t = doc.at("train");
    reject_unknown(t, "train", {"lr", "batch", "steps", "image_size", "adam"});
    read(t, "lr", "train", cfg.train.lr);
    read_int(t, "batch", "train", cfg.train.batch);
    read_int(t, "steps", "train", cfg.train.steps);
    read_int(t, "image_size", "train", cfg.train.image_size);
    if (t.contains("adam")) {
      const json& a = t.at("adam");
      reject_unknown(a, "train.adam", {"beta1", "beta2", "eps"});
      read(a, "beta1", "train.adam", cfg.train.adam.beta1);
      read(a, "beta2", "train.adam", cfg.train.adam.beta2);
      read(a, "eps", "train.adam", cfg.train.adam.eps);
    }
  }
  if (doc.contains("loss_weights")) {
    const json& w = doc.at("loss_weights");
    reject_unknown(w, "loss_weights",
                   {"perceptual", "contextual", "tv", "dlow", "adversarial", "bce"});
    LossWeights& lw = cfg.train.weights;
    read(w, "perceptual", "loss_weights", lw.perceptual);
    read(w, "contextual", "loss_weights", lw.contextual);
    read(w, "tv", "loss_weights", lw.tv);
    read(w, "dlow", "loss_weights", lw.dlow);
    read(w, "adversarial", "loss_weights", lw.adversarial);
    read(w, "bce", "loss_weights", lw.bce);
  }
  if (doc.contains("outputs")) {
    const json& o = doc.at("outputs");
    reject_unknown(o, "outputs", {"weights", "log", "config", "summary"});
    read(o, "weights", "outputs", cfg.outputs.weights);
    read(o, "log", "outputs", cfg.outputs.log);
    read(o, "config", "outputs", cfg.outputs.config);
    read(o, "summary", "outputs", cfg.outputs.summary);
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(doc);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  return parse_run_config_text(std::string(bytes.begin(), bytes.end()));
}

json to_json(const RunConfig& cfg) {
  const LossWeights& lw = cfg.train.weights;
  return json{
      {"preset", cfg.train.preset},
      {"seed", cfg.train.seed},
      {"net",
       {{"stage_channels", cfg.net.stage_channels},
        {"indicator_pool_channels", cfg.net.indicator_pool_channels},
        {"indicator_gram_embed", cfg.net.indicator_gram_embed},
        {"indicator_fc_hidden", cfg.net.indicator_fc_hidden},
        {"indicator_head_channels", cfg.net.indicator_head_channels},
        {"discriminator_channels", cfg.net.discriminator_channels}}},
      {"train",
       {{"lr", cfg.train.lr},
        {"batch", cfg.train.batch},
        {"steps", cfg.train.steps},
        {"image_size", cfg.train.image_size},
        {"adam",
         {{"beta1", cfg.train.adam.beta1},
          {"beta2", cfg.train.adam.beta2},
          {"eps", cfg.train.adam.eps}}}}},
      {"loss_weights",
       {{"perceptual", lw.perceptual},
        {"contextual", lw.contextual},
        {"tv", lw.tv},
        {"dlow", lw.dlow},
        {"adversarial", lw.adversarial},
        {"bce", lw.bce}}},
      {"outputs",
       {{"weights", cfg.outputs.weights},
        {"log", cfg.outputs.log},
        {"config", cfg.outputs.config},
        {"summary", cfg.outputs.summary}}},
  };
}

}  // namespace domstyle
