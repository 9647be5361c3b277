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

#include "domstyle/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "domstyle/error.hpp"
#include "domstyle/ops.hpp"

namespace domstyle {
namespace {

DomainnessBatch to_batch(const std::vector<Domainness>& items) {
  check(!items.empty(), ErrorCode::kInvalidArgument, "domainness batch is empty");
  DomainnessBatch out;
  const auto n = static_cast<std::int64_t>(items.size());
  for (int l = 0; l < 3; ++l) {
    std::vector<float> v;
    v.reserve(items.size());
    for (const auto& d : items) v.push_back(d.alpha_levels[static_cast<std::size_t>(l)]);
    out.levels[static_cast<std::size_t>(l)] = Tensor(Shape{n}, std::move(v));
  }
  return out;
}

Tensor clamped_log(const Tensor& p) {
  return log(clamp(p, kProbabilityClamp, 1.0f - kProbabilityClamp));
}

// log(1 - p) with the same clamp.
Tensor clamped_log_complement(const Tensor& p) {
  return log(add_scalar(scale(clamp(p, kProbabilityClamp, 1.0f - kProbabilityClamp), -1.0f),
                        1.0f));
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {perceptual, contextual, tv, dlow, adversarial, bce}) {
    check(std::isfinite(v) && v >= 0.0, ErrorCode::kConfig,
          "loss weights must be finite and non-negative");
  }
}

Tensor mixup(const Tensor& photo, const Tensor& art, double beta) {
  check(photo.shape() == art.shape(), ErrorCode::kShapeMismatch,
        "mixup: photo " + shape_to_string(photo.shape()) + " vs art " +
            shape_to_string(art.shape()));
  check(beta >= 0.0 && beta <= 1.0, ErrorCode::kInvalidArgument,
        "mixup: beta must lie in [0, 1]");
  if (beta == 0.0) return photo.detach();
  if (beta == 1.0) return art.detach();
  return add(scale(photo, static_cast<float>(1.0 - beta)), scale(art, static_cast<float>(beta)));
}

Tensor loss_bce(const DomainnessBatch& art, const DomainnessBatch& photo) {
  check(art.levels[0].defined() && photo.levels[0].defined() && art.batch() > 0 &&
            photo.batch() > 0,
        ErrorCode::kInvalidArgument, "loss_bce: empty batch");
  // Per-sample cross-entropy over the pooled art and photo items.
  const double pooled = static_cast<double>(art.batch() + photo.batch());
  Tensor total;
  for (int l = 0; l < 3; ++l) {
    const auto li = static_cast<std::size_t>(l);
    Tensor term = add(sum(clamped_log(art.levels[li])),
                      sum(clamped_log_complement(photo.levels[li])));
    total = total.defined() ? add(total, term) : term;
  }
  return scale(total, static_cast<float>(-1.0 / (3.0 * pooled)));
}

Tensor loss_bce(const std::vector<Domainness>& art, const std::vector<Domainness>& photo) {
  return loss_bce(to_batch(art), to_batch(photo));
}

Tensor loss_dlow(const DomainnessBatch& photo, const DomainnessBatch& art,
                 const DomainnessBatch& mix, const std::vector<float>& beta) {
  const std::int64_t n = mix.batch();
  check(photo.batch() == n && art.batch() == n, ErrorCode::kShapeMismatch,
        "loss_dlow: photo, art and mix batches differ in size");
  check(static_cast<std::int64_t>(beta.size()) == n, ErrorCode::kShapeMismatch,
        "loss_dlow: one beta per mixed sample is required");
  std::vector<float> one_minus(beta.size());
  for (std::size_t i = 0; i < beta.size(); ++i) {
    check(beta[i] >= 0.0f && beta[i] <= 1.0f, ErrorCode::kInvalidArgument,
          "loss_dlow: beta must lie in [0, 1]");
    one_minus[i] = 1.0f - beta[i];
  }
  const Tensor b(Shape{n}, beta);
  const Tensor nb(Shape{n}, one_minus);
  Tensor total;
  for (std::size_t l = 0; l < 3; ++l) {
    Tensor term = add(mul(nb, abs(sub(photo.levels[l], mix.levels[l]))),
                      mul(b, abs(sub(art.levels[l], mix.levels[l]))));
    term = mean(term);
    total = total.defined() ? add(total, term) : term;
  }
  return scale(total, 1.0f / 3.0f);
}

Tensor loss_dlow(const Domainness& photo, const Domainness& art, const Domainness& mix,
                 double beta) {
  return loss_dlow(to_batch({photo}), to_batch({art}), to_batch({mix}),
                   {static_cast<float>(beta)});
}

Tensor loss_perceptual(const EncoderActivations& recon, const EncoderActivations& original) {
  Tensor total;
  const Tensor* r[4] = {&recon.s1, &recon.s2, &recon.s3, &recon.f4};
  const Tensor* o[4] = {&original.s1, &original.s2, &original.s3, &original.f4};
  for (int k = 0; k < 4; ++k) {
    check(r[k]->shape() == o[k]->shape(), ErrorCode::kShapeMismatch,
          "loss_perceptual: activation shapes differ");
    Tensor term = mean(pow(sub(*r[k], *o[k]), 2.0f));
    total = total.defined() ? add(total, term) : term;
  }
  return total;
}

Tensor loss_perceptual(const Tensor& recon, const Tensor& original, const WeightStore& ws,
                       const NetConfig& cfg) {
  check(recon.shape() == original.shape(), ErrorCode::kShapeMismatch,
        "loss_perceptual: image shapes differ");
  return loss_perceptual(encode(recon, ws, cfg), encode(original, ws, cfg));
}

namespace {

struct ContextualItem {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d recon, [C, sites]
};

// One item of the contextual loss with features laid out as [C, sites].
ContextualItem contextual_item(const float* x, std::int64_t nx, const float* y,
                               std::int64_t ny, std::int64_t c, bool want_grad) {
  const double h = kContextualBandwidth;
  const double eps = kContextualEpsilon;
  const double norm_floor = 1e-12;
  std::vector<double> mu(static_cast<std::size_t>(c), 0.0);
  for (std::int64_t ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    for (std::int64_t j = 0; j < ny; ++j) acc += y[ch * ny + j];
    mu[static_cast<std::size_t>(ch)] = acc / static_cast<double>(ny);
  }
  // Unit-normalised centred features, site-major.
  auto normalise = [&](const float* f, std::int64_t n, std::vector<double>& unit,
                       std::vector<double>& norms) {
    unit.assign(static_cast<std::size_t>(n * c), 0.0);
    norms.assign(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const double v = f[ch * n + i] - mu[static_cast<std::size_t>(ch)];
        unit[static_cast<std::size_t>(i * c + ch)] = v;
        sq += v * v;
      }
      const double nrm = std::max(std::sqrt(sq), norm_floor);
      norms[static_cast<std::size_t>(i)] = nrm;
      for (std::int64_t ch = 0; ch < c; ++ch) unit[static_cast<std::size_t>(i * c + ch)] /= nrm;
    }
  };
  std::vector<double> xu, xn, yu, yn;
  normalise(x, nx, xu, xn);
  normalise(y, ny, yu, yn);

  const auto sx = static_cast<std::size_t>(nx), sy = static_cast<std::size_t>(ny);
  std::vector<double> d(sx * sy);
  for (std::size_t i = 0; i < sx; ++i) {
    for (std::size_t j = 0; j < sy; ++j) {
      double dot = 0.0;
      for (std::int64_t ch = 0; ch < c; ++ch) {
        dot += xu[i * static_cast<std::size_t>(c) + static_cast<std::size_t>(ch)] *
               yu[j * static_cast<std::size_t>(c) + static_cast<std::size_t>(ch)];
      }
      d[i * sy + j] = 1.0 - dot;
    }
  }
  std::vector<double> dmin(sx);
  std::vector<std::size_t> dmin_at(sx);
  std::vector<double> cx(sx * sy), rowsum(sx);
  for (std::size_t i = 0; i < sx; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < sy; ++j) {
      if (d[i * sy + j] < d[i * sy + best]) best = j;
    }
    dmin[i] = d[i * sy + best];
    dmin_at[i] = best;
    double s = 0.0;
    for (std::size_t j = 0; j < sy; ++j) {
      const double dn = d[i * sy + j] / (dmin[i] + eps);
      const double w = std::exp((1.0 - dn) / h);
      cx[i * sy + j] = w;
      s += w;
    }
    rowsum[i] = s;
    for (std::size_t j = 0; j < sy; ++j) cx[i * sy + j] /= s;
  }
  std::vector<std::size_t> argmax_i(sy);
  double m = 0.0;
  for (std::size_t j = 0; j < sy; ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < sx; ++i) {
      if (cx[i * sy + j] > cx[best * sy + j]) best = i;
    }
    argmax_i[j] = best;
    m += cx[best * sy + j];
  }
  m /= static_cast<double>(sy);
  ContextualItem out;
  out.loss = -std::log(m);
  if (!want_grad) return out;

  // Back through mean-of-max, row softmax, exp, min-normalisation, cosine and
  // unit normalisation. The centring mean comes from the fixed target.
  const double g_cx = -1.0 / (m * static_cast<double>(sy));
  std::vector<double> g(sx * sy, 0.0);  // d loss / d cx
  for (std::size_t j = 0; j < sy; ++j) g[argmax_i[j] * sy + j] = g_cx;
  std::vector<double> g_d(sx * sy, 0.0);
  for (std::size_t i = 0; i < sx; ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < sy; ++j) dot += g[i * sy + j] * cx[i * sy + j];
    const double denom = dmin[i] + eps;
    double g_dmin = 0.0;
    for (std::size_t j = 0; j < sy; ++j) {
      // d cx / d w folded with w = cx * rowsum.
      const double g_w = (g[i * sy + j] - dot) / rowsum[i];
      const double w = cx[i * sy + j] * rowsum[i];
      const double g_dn = -g_w * w / h;
      g_d[i * sy + j] += g_dn / denom;
      g_dmin -= g_dn * d[i * sy + j] / (denom * denom);
    }
    g_d[i * sy + dmin_at[i]] += g_dmin;
  }
  out.grad.assign(static_cast<std::size_t>(c) * sx, 0.0);
  std::vector<double> gu(static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < sx; ++i) {
    std::fill(gu.begin(), gu.end(), 0.0);
    for (std::size_t j = 0; j < sy; ++j) {
      const double gd = g_d[i * sy + j];
      if (gd == 0.0) continue;
      for (std::size_t ch = 0; ch < gu.size(); ++ch) {
        gu[ch] -= gd * yu[j * gu.size() + ch];
      }
    }
    if (xn[i] <= norm_floor) continue;  // zero feature: the unit vector is frozen
    double proj = 0.0;
    for (std::size_t ch = 0; ch < gu.size(); ++ch) proj += gu[ch] * xu[i * gu.size() + ch];
    for (std::size_t ch = 0; ch < gu.size(); ++ch) {
      out.grad[ch * sx + i] = (gu[ch] - xu[i * gu.size() + ch] * proj) / xn[i];
    }
  }
  return out;
}

}  // namespace

Tensor contextual_loss(const Tensor& recon, const Tensor& original) {
  check(recon.rank() == 4 && original.rank() == 4 && recon.dim(0) == original.dim(0) &&
            recon.dim(1) == original.dim(1),
        ErrorCode::kShapeMismatch,
        "contextual_loss: " + shape_to_string(recon.shape()) + " vs " +
            shape_to_string(original.shape()));
  const std::int64_t n = recon.dim(0), c = recon.dim(1);
  const std::int64_t nx = recon.dim(2) * recon.dim(3);
  const std::int64_t ny = original.dim(2) * original.dim(3);
  const bool record = detail::should_record({&recon});
  std::vector<float> grad;
  if (record) grad.assign(recon.data().size(), 0.0f);
  double total = 0.0;
  for (std::int64_t b = 0; b < n; ++b) {
    const ContextualItem item =
        contextual_item(recon.data().data() + b * c * nx, nx,
                        original.data().data() + b * c * ny, ny, c, record);
    total += item.loss;
    if (record) {
      for (std::size_t k = 0; k < item.grad.size(); ++k) {
        grad[static_cast<std::size_t>(b * c * nx) + k] =
            static_cast<float>(item.grad[k] / static_cast<double>(n));
      }
    }
  }
  Tensor out = Tensor::scalar(static_cast<float>(total / static_cast<double>(n)));
  detail::check_finite(out, "contextual_loss");
  if (record) {
    GradTape::active()->record(out, [recon, grad = std::move(grad)](std::span<const float> go) {
      std::vector<float> g(grad.size());
      for (std::size_t k = 0; k < g.size(); ++k) g[k] = grad[k] * go[0];
      recon.accumulate_grad(g);
    });
  }
  return out;
}

Tensor loss_contextual(const Tensor& recon, const Tensor& original, const WeightStore& ws,
                       const NetConfig& cfg) {
  check(recon.shape() == original.shape(), ErrorCode::kShapeMismatch,
        "loss_contextual: image shapes differ");
  return contextual_loss(encode(recon, ws, cfg).f3, encode(original, ws, cfg).f3);
}

Tensor loss_tv(const Tensor& image) {
  Tensor x = image;
  if (x.rank() == 3) x = reshape(x, Shape{1, x.dim(0), x.dim(1), x.dim(2)});
  check(x.rank() == 4, ErrorCode::kShapeMismatch, "loss_tv expects [C,H,W] or [N,C,H,W]");
  const std::int64_t h = x.dim(2), w = x.dim(3);
  check(h >= 2 && w >= 2, ErrorCode::kInvalidArgument, "loss_tv needs H, W >= 2");
  const Tensor vertical = mean(abs(sub(crop(x, 1, 0, h - 1, w), crop(x, 0, 0, h - 1, w))));
  const Tensor horizontal = mean(abs(sub(crop(x, 0, 1, h, w - 1), crop(x, 0, 0, h, w - 1))));
  return add(vertical, horizontal);
}

Tensor loss_adversarial(const Tensor& real_logits, const Tensor& fake_logits,
                        AdversarialSide side) {
  check(fake_logits.defined() && fake_logits.numel() > 0, ErrorCode::kInvalidArgument,
        "loss_adversarial: fake logits missing");
  if (side == AdversarialSide::kDecoder) {
    return scale(mean(clamped_log(sigmoid(fake_logits))), -1.0f);
  }
  check(real_logits.defined() && real_logits.numel() > 0, ErrorCode::kInvalidArgument,
        "loss_adversarial: real logits missing");
  return scale(add(mean(clamped_log(sigmoid(real_logits))),
                   mean(clamped_log_complement(sigmoid(fake_logits)))),
               -1.0f);
}

}  // namespace domstyle
