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

#include <vector>

#include "domstyle/net_config.hpp"
#include "domstyle/networks.hpp"
#include "domstyle/tensor.hpp"
#include "domstyle/weights.hpp"

namespace domstyle {

struct LossWeights {
  double perceptual = 0.1;
  double contextual = 1.0;
  double tv = 1.0;
  double dlow = 1.0;
  double adversarial = 0.1;
  double bce = 5.0;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

enum class DomainLabel { kPhoto, kArt, kMixed };

struct DomainSample {
  Tensor image;  // [3,H,W]
  DomainLabel label = DomainLabel::kPhoto;
  double beta = 0.0;  // 0 photo, 1 art, in (0,1) mixed
};

// Probabilities entering a log are clamped to [p, 1 - p].
inline constexpr float kProbabilityClamp = 1e-7f;
inline constexpr double kContextualBandwidth = 0.5;
inline constexpr double kContextualEpsilon = 1e-5;

// (1 - beta) * photo + beta * art.
Tensor mixup(const Tensor& photo, const Tensor& art, double beta);

// Binary cross-entropy with art labelled 1 and photo 0, averaged over every
// art and photo item and over the three levels.
Tensor loss_bce(const DomainnessBatch& art, const DomainnessBatch& photo);
Tensor loss_bce(const std::vector<Domainness>& art, const std::vector<Domainness>& photo);

// Per item n: (1 - beta_n)|a_photo - a_mix| + beta_n |a_art - a_mix|, averaged
// over items and levels. `beta` has one entry per batch item.
Tensor loss_dlow(const DomainnessBatch& photo, const DomainnessBatch& art,
                 const DomainnessBatch& mix, const std::vector<float>& beta);
Tensor loss_dlow(const Domainness& photo, const Domainness& art, const Domainness& mix,
                 double beta);

// Sum over conv{1..4}_1 of the mean squared activation difference.
Tensor loss_perceptual(const EncoderActivations& recon, const EncoderActivations& original);
Tensor loss_perceptual(const Tensor& recon, const Tensor& original, const WeightStore& ws,
                       const NetConfig& cfg);

// Contextual loss between two feature maps [N,C,H,W], averaged over items.
// The original side is a fixed target; gradients flow to `recon` only.
Tensor contextual_loss(const Tensor& recon, const Tensor& original);
// Contextual loss on the conv3_4 features of the two images.
Tensor loss_contextual(const Tensor& recon, const Tensor& original, const WeightStore& ws,
                       const NetConfig& cfg);

// Anisotropic L1 total variation: mean vertical plus mean horizontal
// absolute neighbour difference.
Tensor loss_tv(const Tensor& image);

enum class AdversarialSide { kDiscriminator, kDecoder };

// Non-saturating GAN losses on logits. `real_logits` is ignored on the
// decoder side.
Tensor loss_adversarial(const Tensor& real_logits, const Tensor& fake_logits,
                        AdversarialSide side);

// Crop extent used by metric_style_loss for an image of the given size.
int style_metric_crop(std::int64_t height, std::int64_t width);

// Mean over five crops (four corners and the centre) of the summed squared
// gram difference (mean over gram entries) at conv{1..4}_1.
double metric_style_loss(const Tensor& output, const Tensor& style, const WeightStore& ws,
                         const NetConfig& cfg);

// Luma 0.299R + 0.587G + 0.114B of a [3,H,W] or [1,3,H,W] image, as [H,W].
std::vector<double> grayscale(const Tensor& image, std::int64_t* height, std::int64_t* width);
// Sobel gradient magnitude of an [H,W] plane with reflected borders.
std::vector<double> sobel_magnitude(const std::vector<double>& plane, std::int64_t height,
                                    std::int64_t width);
// SSIM of two planes with an 11x11 Gaussian window (sigma 1.5) over valid
// positions, K1 = 0.01, K2 = 0.03 and the given dynamic range.
double ssim(const std::vector<double>& a, const std::vector<double>& b, std::int64_t height,
            std::int64_t width, double dynamic_range);
// SSIM between Sobel edge maps; the dynamic range is the largest edge
// magnitude seen in either image (1 when both are flat).
double metric_edge_ssim(const Tensor& output, const Tensor& content);

}  // namespace domstyle
