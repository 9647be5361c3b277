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

#include "domstyle/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numbers>

#include "domstyle/networks.hpp"
#include "domstyle/ops.hpp"
#include "domstyle/pipeline.hpp"
#include "domstyle/skip.hpp"

namespace domstyle {
namespace {

constexpr std::uint64_t kDataSalt = 0xD47A5EEDull;

struct Color {
  double r, g, b;
};

Color random_color(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

class Canvas {
 public:
  explicit Canvas(int size) : size_(size), px_(static_cast<std::size_t>(3 * size * size)) {}

  void blend(int y, int x, const Color& c, double a) {
    const std::size_t plane = static_cast<std::size_t>(size_ * size_);
    const std::size_t i = static_cast<std::size_t>(y * size_ + x);
    px_[i] = (1.0 - a) * px_[i] + a * c.r;
    px_[plane + i] = (1.0 - a) * px_[plane + i] + a * c.g;
    px_[2 * plane + i] = (1.0 - a) * px_[2 * plane + i] + a * c.b;
  }
  void add(int y, int x, int channel, double v) {
    px_[static_cast<std::size_t>(channel * size_ * size_ + y * size_ + x)] += v;
  }
  Tensor finish() const {
    std::vector<float> v(px_.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = static_cast<float>(std::clamp(px_[i], 0.0, 1.0));
    }
    return Tensor(Shape{3, size_, size_}, std::move(v));
  }
  int size() const { return size_; }

 private:
  int size_;
  std::vector<double> px_;
};

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor stack(const std::vector<Tensor>& images) {
  std::vector<Tensor> items;
  items.reserve(images.size());
  for (const auto& im : images) {
    items.push_back(reshape(im, Shape{1, im.dim(0), im.dim(1), im.dim(2)}));
  }
  return concat_batch(items);
}

std::vector<Domainness> items_of(const DomainnessBatch& d, std::int64_t start,
                                 std::int64_t count) {
  std::vector<Domainness> out;
  for (std::int64_t i = start; i < start + count; ++i) out.push_back(d.item(i));
  return out;
}

DomainnessBatch slice_levels(const DomainnessBatch& d, std::int64_t start,
                             std::int64_t count) {
  DomainnessBatch out;
  for (std::size_t l = 0; l < 3; ++l) out.levels[l] = slice_batch(d.levels[l], start, count);
  return out;
}

Tensor weighted(const Tensor& t, double w) { return scale(t, static_cast<float>(w)); }

}  // namespace

void AdamOptimizer::step(WeightStore& ws) {
  ++steps_;
  for (const auto& [name, tensor] : ws.entries()) {
    if (name.rfind(prefix_, 0) != 0) continue;
    Tensor t = tensor;
    std::vector<float> zeros;
    std::span<const float> g;
    if (t.has_grad()) {
      g = t.grad();
    } else {
      zeros.assign(t.data().size(), 0.0f);
      g = zeros;
    }
    adam_update<float>(t.mutable_data(), g, state_[name], cfg_);
    t.zero_grad();
  }
}

void set_trainable(WeightStore& ws, const std::string& prefix, bool on) {
  for (const auto& [name, tensor] : ws.entries()) {
    if (name.rfind(prefix, 0) != 0) continue;
    Tensor t = tensor;
    t.set_requires_grad(on);
    t.zero_grad();
  }
}

Tensor synth_photo(Rng& rng, int size) {
  Canvas cv(size);
  const double s = size;
  const Color c0 = random_color(rng, 0.15, 0.85);
  const Color c1 = random_color(rng, 0.15, 0.85);
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double t = std::clamp(
          0.5 + ((x - s / 2) * std::cos(theta) + (y - s / 2) * std::sin(theta)) / s, 0.0, 1.0);
      cv.blend(y, x, Color{c0.r + t * (c1.r - c0.r), c0.g + t * (c1.g - c0.g),
                           c0.b + t * (c1.b - c0.b)},
               1.0);
    }
  }
  const int blobs = static_cast<int>(rng.uniform_int(2, 3));
  for (int k = 0; k < blobs; ++k) {
    const double cy = rng.uniform(0, s), cx = rng.uniform(0, s);
    const double r = rng.uniform(s / 8, s / 3);
    const Color c = random_color(rng, 0.1, 0.9);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        cv.blend(y, x, c, 0.6 * std::exp(-d2 / (2 * r * r)));
      }
    }
  }
  // Soft-edged discs and boxes give the image structure without texture.
  const int shapes = static_cast<int>(rng.uniform_int(1, 3));
  for (int k = 0; k < shapes; ++k) {
    const double cy = rng.uniform(s / 6, 5 * s / 6), cx = rng.uniform(s / 6, 5 * s / 6);
    const double r = rng.uniform(s / 10, s / 4);
    const bool box = rng.uniform() < 0.5;
    const Color c = random_color(rng, 0.05, 0.95);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double d = box ? std::max(std::abs(y - cy), std::abs(x - cx))
                             : std::hypot(y - cy, x - cx);
        cv.blend(y, x, c, 0.9 * logistic((r - d) / 1.5));
      }
    }
  }
  return cv.finish();
}

Tensor synth_art(Rng& rng, int size) {
  Canvas cv(size);
  const Color c0 = random_color(rng, 0.0, 1.0);
  const Color c1 = random_color(rng, 0.0, 1.0);
  const Color c2 = random_color(rng, 0.0, 1.0);
  const double f1 = rng.uniform(0.18, 0.42), f2 = rng.uniform(0.18, 0.42);
  const double t1 = rng.uniform(0.0, std::numbers::pi), t2 = rng.uniform(0.0, std::numbers::pi);
  const double p1 = rng.uniform(0.0, 2 * std::numbers::pi);
  const double p2 = rng.uniform(0.0, 2 * std::numbers::pi);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double a = 0.5 + 0.5 * std::sin(two_pi * f1 * (x * std::cos(t1) + y * std::sin(t1)) + p1);
      const double b = 0.5 + 0.5 * std::sin(two_pi * f2 * (x * std::cos(t2) + y * std::sin(t2)) + p2);
      cv.blend(y, x, Color{c0.r + a * (c1.r - c0.r), c0.g + a * (c1.g - c0.g),
                           c0.b + a * (c1.b - c0.b)},
               1.0);
      cv.blend(y, x, c2, 0.45 * b);
    }
  }
  const int strokes = static_cast<int>(rng.uniform_int(12, 20));
  for (int k = 0; k < strokes; ++k) {
    const double y0 = rng.uniform(0, size), x0 = rng.uniform(0, size);
    const double len = rng.uniform(6, 16);
    const double th = rng.uniform(0.0, two_pi);
    const Color c = random_color(rng, 0.0, 1.0);
    for (int i = 0; i <= static_cast<int>(len); ++i) {
      const int y = static_cast<int>(y0 + i * std::sin(th));
      const int x = static_cast<int>(x0 + i * std::cos(th));
      if (y >= 0 && y < size && x >= 0 && x < size) cv.blend(y, x, c, 0.85);
    }
  }
  for (int ch = 0; ch < 3; ++ch) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) cv.add(y, x, ch, 0.08 * rng.normal());
    }
  }
  return cv.finish();
}

DomainTriplet synth_triplet(const SyntheticDomainSpec& spec, Rng& rng, double beta) {
  check(spec.image_size >= 8, ErrorCode::kInvalidArgument, "synthetic images need size >= 8");
  DomainTriplet t;
  t.photo = synth_photo(rng, spec.image_size);
  t.art = synth_art(rng, spec.image_size);
  if (beta < 0.0) {
    do {
      beta = rng.uniform();
    } while (beta <= 0.0);
  }
  t.beta = beta;
  t.mix = mixup(t.photo, t.art, beta);
  return t;
}

std::vector<DomainSample> synth_dataset(const SyntheticDomainSpec& spec, int n,
                                        std::uint64_t seed) {
  check(n >= 1, ErrorCode::kInvalidArgument, "synth_dataset needs n >= 1");
  Rng rng(seed);
  std::vector<DomainSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    switch (i % 3) {
      case 0:
        out.push_back({synth_photo(rng, spec.image_size), DomainLabel::kPhoto, 0.0});
        break;
      case 1:
        out.push_back({synth_art(rng, spec.image_size), DomainLabel::kArt, 1.0});
        break;
      default: {
        const DomainTriplet t = synth_triplet(spec, rng);
        out.push_back({t.mix, DomainLabel::kMixed, t.beta});
      }
    }
  }
  return out;
}

double high_freq_energy(const Tensor& image) {
  const Tensor hf = high_freq(image);
  double acc = 0.0;
  for (float v : hf.data()) acc += static_cast<double>(v) * v;
  return acc / static_cast<double>(hf.numel());
}

void TrainConfig::validate() const {
  NetConfig::preset(preset);
  check(std::isfinite(lr) && lr > 0.0, ErrorCode::kConfig, "train lr must be positive");
  check(batch >= 1, ErrorCode::kConfig, "train batch must be >= 1");
  check(steps >= 1, ErrorCode::kConfig, "train steps must be >= 1");
  check(image_size >= 32 && image_size % 8 == 0, ErrorCode::kConfig,
        "train image_size must be a multiple of 8 and at least 32");
  check(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 &&
            adam.eps > 0.0,
        ErrorCode::kConfig, "adam betas must lie in [0, 1) and eps must be positive");
  weights.validate();
}

AdamConfig TrainConfig::adam_config() const {
  AdamConfig a = adam;
  a.lr = lr;
  return a;
}

std::string LossReport::log_header() {
  return "step\tL_bce\tL_dlow\tL_p\tL_cx\tL_tv\tL_adv_D\tL_adv_G\talpha_photo_mean\t"
         "alpha_art_mean";
}

std::string LossReport::log_line() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%lld\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f",
                static_cast<long long>(step), bce, dlow, perceptual, contextual, tv, adv_d,
                adv_g, alpha_photo_mean, alpha_art_mean);
  return buf;
}

Trainer::Trainer(const TrainConfig& cfg, const NetConfig& net)
    : cfg_(cfg),
      net_(net),
      indicator_opt_("indicator.", cfg.adam_config()),
      decoder_opt_("decoder.", cfg.adam_config()),
      discriminator_opt_("discriminator.", cfg.adam_config()) {
  cfg_.validate();
  net_.validate();
  ws_ = init_weights(net_, cfg_.seed);
  set_trainable(ws_, "", false);
}

LossReport Trainer::step() {
  try {
    return step_impl();
  } catch (const Error& e) {
    fail(e.code(), "training step " + std::to_string(step_ + 1) + " aborted: " + e.what());
  }
}

LossReport Trainer::step_impl() {
  const LossWeights& lw = cfg_.weights;
  const std::int64_t b = cfg_.batch;
  ++step_;
  Rng rng = Rng(cfg_.seed ^ kDataSalt).fork(static_cast<std::uint64_t>(step_));
  const SyntheticDomainSpec spec{cfg_.image_size};
  std::vector<Tensor> photos, arts, mixes;
  std::vector<float> betas;
  for (std::int64_t i = 0; i < b; ++i) {
    DomainTriplet t = synth_triplet(spec, rng);
    photos.push_back(t.photo);
    arts.push_back(t.art);
    mixes.push_back(t.mix);
    betas.push_back(static_cast<float>(t.beta));
  }
  const Tensor photo = stack(photos);
  const Tensor art = stack(arts);
  // Encoder weights never track gradients, so these activations are constants.
  const EncoderActivations acts = encode(concat_batch({photo, art, stack(mixes)}), ws_, net_);

  LossReport r;
  r.step = step_;

  // Indicator: classification of photo/art plus interpolation on mixes.
  DomainnessBatch dom;
  set_trainable(ws_, "indicator.", true);
  {
    GradTape tape;
    dom = indicator_from_features(acts, ws_, net_);
    const DomainnessBatch dp = slice_levels(dom, 0, b);
    const DomainnessBatch da = slice_levels(dom, b, b);
    const DomainnessBatch dm = slice_levels(dom, 2 * b, b);
    const Tensor bce = loss_bce(da, dp);
    const Tensor dlow = loss_dlow(dp, da, dm, betas);
    r.bce = bce.item();
    r.dlow = dlow.item();
    tape.backward(add(weighted(bce, lw.bce), weighted(dlow, lw.dlow)));
  }
  indicator_opt_.step(ws_);
  set_trainable(ws_, "indicator.", false);
  const std::vector<Domainness> photo_dom = items_of(dom, 0, b);
  const std::vector<Domainness> art_dom = items_of(dom, b, b);
  for (std::int64_t i = 0; i < b; ++i) {
    r.alpha_photo_mean += photo_dom[static_cast<std::size_t>(i)].alpha_mean;
    r.alpha_art_mean += art_dom[static_cast<std::size_t>(i)].alpha_mean;
  }
  r.alpha_photo_mean /= static_cast<double>(b);
  r.alpha_art_mean /= static_cast<double>(b);

  // Stylized pass inputs: photo content, art style, the style's domainness.
  const EncoderActivations photo_acts = slice_activations(acts, 0, b);
  const EncoderActivations art_acts = slice_activations(acts, b, b);
  const bool adversarial = lw.adversarial > 0.0;
  DecoderInputs stylized;
  if (adversarial) {
    stylized = transform_features(photo_acts, art_acts, art_dom);
    const Tensor fake =
        decode(stylized.bottleneck, stylized.skips, stylized.shortcuts, ws_, net_);
    set_trainable(ws_, "discriminator.", true);
    {
      GradTape tape;
      const Tensor loss = loss_adversarial(discriminator_forward(art, ws_),
                                           discriminator_forward(fake, ws_),
                                           AdversarialSide::kDiscriminator);
      r.adv_d = loss.item();
      tape.backward(loss);
    }
    discriminator_opt_.step(ws_);
    set_trainable(ws_, "discriminator.", false);
  }

  // Decoder: identity reconstruction of the content photos (style := content),
  // plus the adversarial term on the stylized pass.
  const EncoderActivations& ident = photo_acts;
  const DecoderInputs rec_in = transform_features(ident, ident, photo_dom);
  set_trainable(ws_, "decoder.", true);
  {
    GradTape tape;
    const Tensor recon = decode(rec_in.bottleneck, rec_in.skips, rec_in.shortcuts, ws_, net_);
    const EncoderActivations ra = encode(recon, ws_, net_);
    const Tensor lp = loss_perceptual(ra, ident);
    const Tensor lcx = contextual_loss(ra.f3, ident.f3);
    const Tensor ltv = loss_tv(recon);
    r.perceptual = lp.item();
    r.contextual = lcx.item();
    r.tv = ltv.item();
    r.reconstruction = lw.perceptual * r.perceptual + lw.contextual * r.contextual;
    Tensor total = add(add(weighted(lp, lw.perceptual), weighted(lcx, lw.contextual)),
                       weighted(ltv, lw.tv));
    if (adversarial) {
      const Tensor fake =
          decode(stylized.bottleneck, stylized.skips, stylized.shortcuts, ws_, net_);
      const Tensor adv = loss_adversarial(Tensor(), discriminator_forward(fake, ws_),
                                          AdversarialSide::kDecoder);
      r.adv_g = adv.item();
      total = add(total, weighted(adv, lw.adversarial));
    }
    tape.backward(total);
  }
  decoder_opt_.step(ws_);
  set_trainable(ws_, "decoder.", false);
  return r;
}

TrainResult train(const TrainConfig& cfg, std::ostream* log,
                  const std::function<void(const LossReport&)>& on_step) {
  return train(cfg, NetConfig::preset(cfg.preset), log, on_step);
}

TrainResult train(const TrainConfig& cfg, const NetConfig& net, std::ostream* log,
                  const std::function<void(const LossReport&)>& on_step) {
  const auto start = std::chrono::steady_clock::now();
  Trainer trainer(cfg, net);
  TrainResult out;
  if (log) *log << LossReport::log_header() << '\n';
  for (int s = 0; s < cfg.steps; ++s) {
    LossReport r = trainer.step();
    if (log) *log << r.log_line() << '\n' << std::flush;
    if (on_step) on_step(r);
    out.history.push_back(r);
  }
  out.weights = trainer.weights().clone();
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace domstyle
