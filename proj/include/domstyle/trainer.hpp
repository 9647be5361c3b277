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

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "domstyle/error.hpp"
#include "domstyle/losses.hpp"
#include "domstyle/net_config.hpp"
#include "domstyle/random.hpp"
#include "domstyle/tensor.hpp"
#include "domstyle/weights.hpp"

namespace domstyle {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool operator==(const AdamConfig&) const = default;
};

template <typename T>
struct AdamState {
  std::vector<T> m, v;
  std::int64_t t = 0;
};

// One bias-corrected Adam step on a flat parameter block. The state is
// lazily sized to the block on first use.
template <typename T>
void adam_update(std::span<T> params, std::span<const T> grads, AdamState<T>& state,
                 const AdamConfig& cfg) {
  check(params.size() == grads.size(), ErrorCode::kShapeMismatch,
        "adam: parameter and gradient sizes differ");
  if (state.m.empty()) {
    state.m.assign(params.size(), T(0));
    state.v.assign(params.size(), T(0));
  }
  check(state.m.size() == params.size(), ErrorCode::kShapeMismatch,
        "adam: optimizer state does not match the parameter block");
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = static_cast<double>(grads[i]);
    const double m = cfg.beta1 * static_cast<double>(state.m[i]) + (1.0 - cfg.beta1) * g;
    const double v = cfg.beta2 * static_cast<double>(state.v[i]) + (1.0 - cfg.beta2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    const double step = cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
    params[i] = static_cast<T>(static_cast<double>(params[i]) - step);
  }
}

// Adam over every tensor of a WeightStore whose name starts with `prefix`.
class AdamOptimizer {
 public:
  AdamOptimizer(std::string prefix, AdamConfig cfg) : prefix_(std::move(prefix)), cfg_(cfg) {}

  // Updates every matching tensor (a missing gradient counts as zero) and
  // clears the gradients.
  void step(WeightStore& ws);
  std::int64_t steps() const { return steps_; }

 private:
  std::string prefix_;
  AdamConfig cfg_;
  std::map<std::string, AdamState<float>> state_;
  std::int64_t steps_ = 0;
};

// Marks every tensor under prefix as trainable (or not) and clears its grad.
void set_trainable(WeightStore& ws, const std::string& prefix, bool on);

struct SyntheticDomainSpec {
  int image_size = 64;
};

// Smooth gradients with soft-edged shapes and blobs.
Tensor synth_photo(Rng& rng, int size);
// Oriented high-frequency stripes, thin strokes and grain.
Tensor synth_art(Rng& rng, int size);

struct DomainTriplet {
  Tensor photo, art, mix;  // [3,H,W]
  double beta = 0.5;
};
// beta < 0 draws it uniformly from [0, 1).
DomainTriplet synth_triplet(const SyntheticDomainSpec& spec, Rng& rng, double beta = -1.0);

// Photo, art and mixed samples in turn, deterministic per seed.
std::vector<DomainSample> synth_dataset(const SyntheticDomainSpec& spec, int n,
                                        std::uint64_t seed);

// Mean squared high-frequency response of an image.
double high_freq_energy(const Tensor& image);

struct TrainConfig {
  std::string preset = "toy";
  double lr = 1e-4;
  int batch = 6;
  int steps = 2000;
  std::uint64_t seed = 0;
  int image_size = 64;
  AdamConfig adam;  // lr here is overridden by `lr`
  LossWeights weights;

  void validate() const;
  AdamConfig adam_config() const;
  bool operator==(const TrainConfig&) const = default;
};

struct LossReport {
  std::int64_t step = 0;
  double bce = 0, dlow = 0;
  double perceptual = 0, contextual = 0, tv = 0;
  double adv_d = 0, adv_g = 0;
  double alpha_photo_mean = 0, alpha_art_mean = 0;
  double reconstruction = 0;  // weighted perceptual plus contextual term

  static std::string log_header();
  std::string log_line() const;
};

// Owns the weights and optimizer state of one training run. The encoder is
// initialised once and never updated.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const NetConfig& net);

  LossReport step();
  const WeightStore& weights() const { return ws_; }
  const NetConfig& net() const { return net_; }
  std::int64_t steps_done() const { return step_; }

 private:
  LossReport step_impl();

  TrainConfig cfg_;
  NetConfig net_;
  WeightStore ws_;
  AdamOptimizer indicator_opt_, decoder_opt_, discriminator_opt_;
  std::int64_t step_ = 0;
};

struct TrainResult {
  WeightStore weights;
  std::vector<LossReport> history;
  double seconds = 0.0;
};

// Runs cfg.steps steps. Log lines go to `log` (header first) when given.
TrainResult train(const TrainConfig& cfg, std::ostream* log = nullptr,
                  const std::function<void(const LossReport&)>& on_step = {});
TrainResult train(const TrainConfig& cfg, const NetConfig& net, std::ostream* log = nullptr,
                  const std::function<void(const LossReport&)>& on_step = {});

}  // namespace domstyle
