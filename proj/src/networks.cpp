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

#include "domstyle/networks.hpp"

#include <cmath>
#include <numeric>

#include "domstyle/error.hpp"
#include "domstyle/ops.hpp"
#include "domstyle/random.hpp"
#include "domstyle/transforms.hpp"

namespace domstyle {

const Tensor& EncoderActivations::tap(int level) const {
  switch (level) {
    case 1: return f1;
    case 2: return f2;
    case 3: return f3;
    default: fail(ErrorCode::kInvalidArgument, "tap level must be 1..3");
  }
}

const Tensor& EncoderActivations::shortcut(int level) const {
  switch (level) {
    case 1: return s1;
    case 2: return s2;
    case 3: return s3;
    default: fail(ErrorCode::kInvalidArgument, "shortcut level must be 1..3");
  }
}

Domainness Domainness::uniform(float alpha) {
  Domainness d;
  d.alpha_levels = {alpha, alpha, alpha};
  d.alpha_mean = alpha;
  return d;
}

Domainness DomainnessBatch::item(std::int64_t n) const {
  Domainness d;
  double acc = 0.0;
  for (int l = 0; l < 3; ++l) {
    d.alpha_levels[l] = levels[l].data()[static_cast<std::size_t>(n)];
    acc += d.alpha_levels[l];
  }
  d.alpha_mean = static_cast<float>(acc / 3.0);
  return d;
}

std::string encoder_conv_name(int stage, int index) {
  return "encoder.conv" + std::to_string(stage) + "_" + std::to_string(index);
}

std::string decoder_conv_name(int stage, int index) {
  return "decoder.conv" + std::to_string(stage) + "_" + std::to_string(index);
}

namespace {

struct LayerSpec {
  std::string name;
  Shape weight;  // conv [out,in,k,k] or linear [out,in]
};

std::int64_t fan_in(const Shape& w) {
  std::int64_t f = 1;
  for (std::size_t i = 1; i < w.size(); ++i) f *= w[i];
  return f;
}

std::vector<LayerSpec> encoder_layers(const NetConfig& cfg) {
  std::vector<LayerSpec> out;
  std::int64_t in = 3;
  for (int s = 1; s <= 4; ++s) {
    const std::int64_t c = cfg.stage_channels[s - 1];
    for (int i = 1; i <= kStageConvCounts[s - 1]; ++i) {
      out.push_back({encoder_conv_name(s, i), {c, in, 3, 3}});
      in = c;
    }
  }
  return out;
}

std::int64_t decoder_out_channels(const NetConfig& cfg, int stage, int index) {
  if (index > 1) return cfg.stage_channels[stage - 1];
  return stage == 1 ? 3 : cfg.stage_channels[stage - 2];
}

std::vector<LayerSpec> decoder_layers(const NetConfig& cfg) {
  std::vector<LayerSpec> out;
  for (int s = 4; s >= 1; --s) {
    const std::int64_t c = cfg.stage_channels[s - 1];
    for (int i = kStageConvCounts[s - 1]; i >= 1; --i) {
      out.push_back({decoder_conv_name(s, i), {decoder_out_channels(cfg, s, i), c, 3, 3}});
    }
  }
  return out;
}

std::vector<LayerSpec> indicator_layers(const NetConfig& cfg) {
  std::vector<LayerSpec> out;
  const std::int64_t cp = cfg.indicator_pool_channels;
  const std::int64_t cg = cfg.indicator_gram_embed;
  const std::int64_t hidden = cfg.indicator_fc_hidden;
  const std::int64_t ch = cfg.indicator_head_channels;
  for (int l = 1; l <= 3; ++l) {
    const std::int64_t c = cfg.stage_channels[l - 1];
    const std::string p = "indicator.psi" + std::to_string(l);
    out.push_back({p + ".fc1", {hidden, c * c}});
    out.push_back({p + ".fc2", {cg, hidden}});
    out.push_back({"indicator.pool" + std::to_string(l), {cp, c, 1, 1}});
  }
  out.push_back({"indicator.head.conv1", {ch, cg + cp, 3, 3}});
  out.push_back({"indicator.head.conv2", {ch, ch, 3, 3}});
  out.push_back({"indicator.head.conv3", {1, ch, 1, 1}});
  return out;
}

std::vector<LayerSpec> discriminator_layers(const NetConfig& cfg) {
  std::vector<LayerSpec> out;
  std::int64_t in = 3;
  for (int k = 1; k <= 4; ++k) {
    const std::int64_t c = cfg.discriminator_channels[k - 1];
    out.push_back({"discriminator.block" + std::to_string(k), {c, in, 3, 3}});
    in = c;
  }
  out.push_back({"discriminator.tap1", {1, cfg.discriminator_channels[0], 1, 1}});
  out.push_back({"discriminator.tap3", {1, cfg.discriminator_channels[2], 1, 1}});
  out.push_back({"discriminator.final", {1, cfg.discriminator_channels[3], 1, 1}});
  return out;
}

std::vector<LayerSpec> component_layers(const std::string& component, const NetConfig& cfg) {
  if (component == "encoder") return encoder_layers(cfg);
  if (component == "decoder") return decoder_layers(cfg);
  if (component == "indicator") return indicator_layers(cfg);
  if (component == "discriminator") return discriminator_layers(cfg);
  fail(ErrorCode::kInvalidArgument, "unknown component '" + component + "'");
}

std::uint64_t component_salt(const std::string& component) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : component) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  return h;
}

Tensor conv(const Tensor& x, const WeightStore& ws, const std::string& name,
            PadMode pad = PadMode::kReflect, int stride = 1) {
  const Tensor w = ws.get(name + ".weight");
  const int k = static_cast<int>(w.dim(2));
  return conv2d(x, w, ws.get(name + ".bias"), stride, pad, k / 2);
}

}  // namespace

void init_component(WeightStore& ws, const std::string& component, const NetConfig& cfg,
                    std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed ^ component_salt(component));
  for (const auto& layer : component_layers(component, cfg)) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in(layer.weight)));
    Tensor w(layer.weight);
    for (auto& v : w.mutable_data()) v = static_cast<float>(rng.uniform(-bound, bound));
    ws.add(layer.name + ".weight", w);
    ws.add(layer.name + ".bias", Tensor(Shape{layer.weight[0]}, 0.0f));
  }
}

WeightStore init_weights(const NetConfig& cfg, std::uint64_t seed) {
  WeightStore ws;
  for (const char* c : {"encoder", "decoder", "indicator", "discriminator"}) {
    init_component(ws, c, cfg, seed);
  }
  return ws;
}

std::int64_t expected_parameter_count(const std::string& component, const NetConfig& cfg) {
  std::int64_t total = 0;
  for (const auto& layer : component_layers(component, cfg)) {
    total += shape_numel(layer.weight) + layer.weight[0];
  }
  return total;
}

NetConfig infer_config(const WeightStore& ws) {
  NetConfig cfg;
  for (int s = 1; s <= 4; ++s) {
    cfg.stage_channels[s - 1] =
        static_cast<int>(ws.get(encoder_conv_name(s, 1) + ".weight").dim(0));
  }
  if (ws.contains("indicator.pool1.weight")) {
    cfg.indicator_pool_channels = static_cast<int>(ws.get("indicator.pool1.weight").dim(0));
    cfg.indicator_fc_hidden = static_cast<int>(ws.get("indicator.psi1.fc1.weight").dim(0));
    cfg.indicator_gram_embed = static_cast<int>(ws.get("indicator.psi1.fc2.weight").dim(0));
    cfg.indicator_head_channels =
        static_cast<int>(ws.get("indicator.head.conv1.weight").dim(0));
  }
  if (ws.contains("discriminator.block1.weight")) {
    for (int k = 1; k <= 4; ++k) {
      cfg.discriminator_channels[k - 1] = static_cast<int>(
          ws.get("discriminator.block" + std::to_string(k) + ".weight").dim(0));
    }
  }
  cfg.validate();
  return cfg;
}

EncoderActivations encode(const Tensor& image, const WeightStore& ws, const NetConfig& cfg) {
  check(image.rank() == 4 && image.dim(1) == 3, ErrorCode::kShapeMismatch,
        "encode expects [N,3,H,W], got " + shape_to_string(image.shape()));
  check(image.dim(2) % 8 == 0 && image.dim(3) % 8 == 0, ErrorCode::kShapeMismatch,
        "encode needs H and W divisible by 8, got " + shape_to_string(image.shape()));
  EncoderActivations acts;
  Tensor x = image;
  for (int s = 1; s <= 4; ++s) {
    if (s > 1) x = pool2d(x, PoolKind::kAvg, 2, 2);
    for (int i = 1; i <= kStageConvCounts[s - 1]; ++i) {
      x = relu(conv(x, ws, encoder_conv_name(s, i)));
      check(x.dim(1) == cfg.stage_channels[s - 1], ErrorCode::kShapeMismatch,
            encoder_conv_name(s, i) + " width disagrees with the config");
      if (i == 1) {
        if (s == 1) acts.s1 = x;
        if (s == 2) acts.s2 = x;
        if (s == 3) acts.s3 = x;
      }
    }
    if (s == 1) acts.f1 = x;
    if (s == 2) acts.f2 = x;
    if (s == 3) acts.f3 = x;
    if (s == 4) acts.f4 = x;
  }
  return acts;
}

Tensor decode(const Tensor& bottleneck, const std::array<Tensor, 3>& skips,
              const std::array<Tensor, 3>& shortcuts, const WeightStore& ws,
              const NetConfig& cfg) {
  check(bottleneck.rank() == 4 && bottleneck.dim(1) == cfg.stage_channels[3],
        ErrorCode::kShapeMismatch,
        "decode: bottleneck " + shape_to_string(bottleneck.shape()) + " does not have " +
            std::to_string(cfg.stage_channels[3]) + " channels");
  Tensor x = bottleneck;
  for (int s = 4; s >= 1; --s) {
    if (s < 4) {
      x = upsample_nearest(x, 2);
      const Tensor& skip = skips[s - 1];
      check(skip.defined() && skip.shape() == x.shape(), ErrorCode::kShapeMismatch,
            "decode: level-" + std::to_string(s) + " skip payload " +
                (skip.defined() ? shape_to_string(skip.shape()) : std::string("<none>")) +
                " does not match decoder feature " + shape_to_string(x.shape()));
      x = add(x, skip);
    }
    for (int i = kStageConvCounts[s - 1]; i >= 1; --i) {
      if (i == 1 && s < 4) {
        const Tensor& sc = shortcuts[s - 1];
        check(sc.defined() && sc.rank() == 4 && sc.dim(1) == x.dim(1) &&
                  (sc.dim(0) == 1 || sc.dim(0) == x.dim(0)),
              ErrorCode::kShapeMismatch,
              "decode: level-" + std::to_string(s) + " shortcut payload does not match");
        x = stat_match(x, sc);
      }
      x = conv(x, ws, decoder_conv_name(s, i));
      x = (s == 1 && i == 1) ? sigmoid(x) : relu(x);
    }
  }
  return x;
}

DomainnessBatch indicator_from_features(const EncoderActivations& acts,
                                        const WeightStore& ws, const NetConfig& cfg) {
  const std::int64_t n = acts.f3.dim(0);
  const std::int64_t h3 = acts.f3.dim(2), w3 = acts.f3.dim(3);
  DomainnessBatch out;
  for (int l = 1; l <= 3; ++l) {
    const Tensor& f = acts.tap(l);
    const std::int64_t c = f.dim(1);
    const std::string psi = "indicator.psi" + std::to_string(l);
    Tensor texture = reshape(gram(f), Shape{n, c * c});
    texture = relu(linear(texture, ws.get(psi + ".fc1.weight"), ws.get(psi + ".fc1.bias")));
    texture = linear(texture, ws.get(psi + ".fc2.weight"), ws.get(psi + ".fc2.bias"));
    check(texture.dim(1) == cfg.indicator_gram_embed, ErrorCode::kShapeMismatch,
          psi + " width disagrees with the config");
    const Tensor texture_map = broadcast_spatial(texture, h3, w3);

    Tensor structure = conv(f, ws, "indicator.pool" + std::to_string(l));
    const int factor = 1 << (3 - l);
    if (factor > 1) structure = pool2d(structure, PoolKind::kAvg, factor, factor);

    Tensor x = concat_channels({texture_map, structure});
    x = relu(conv(x, ws, "indicator.head.conv1"));
    x = relu(conv(x, ws, "indicator.head.conv2"));
    x = conv(x, ws, "indicator.head.conv3");
    x = reshape(global_avg_pool(x), Shape{n});
    out.levels[l - 1] = sigmoid(x);
  }
  return out;
}

DomainnessBatch indicator_forward(const Tensor& image, const WeightStore& ws,
                                  const NetConfig& cfg) {
  return indicator_from_features(encode(image, ws, cfg), ws, cfg);
}

Tensor discriminator_forward(const Tensor& image, const WeightStore& ws) {
  check(image.rank() == 4 && image.dim(1) == 3, ErrorCode::kShapeMismatch,
        "discriminator expects [N,3,H,W]");
  check(image.dim(2) >= 16 && image.dim(3) >= 16, ErrorCode::kShapeMismatch,
        "discriminator needs spatial extent >= 16 for four stride-2 blocks, got " +
            shape_to_string(image.shape()));
  const std::int64_t n = image.dim(0);
  Tensor x = image;
  std::vector<Tensor> logits;
  for (int k = 1; k <= 4; ++k) {
    x = leaky_relu(conv(x, ws, "discriminator.block" + std::to_string(k), PadMode::kZero, 2),
                   0.2f);
    if (k == 1 || k == 3) {
      logits.push_back(conv(x, ws, "discriminator.tap" + std::to_string(k), PadMode::kZero));
    }
  }
  logits.push_back(conv(x, ws, "discriminator.final", PadMode::kZero));
  Tensor total;
  for (const auto& map : logits) {
    Tensor m = reshape(global_avg_pool(map), Shape{n});
    total = total.defined() ? add(total, m) : m;
  }
  return scale(total, 1.0f / 3.0f);
}

}  // namespace domstyle
