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

#include "domstyle/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "domstyle/error.hpp"
#include "domstyle/ops.hpp"

namespace domstyle {
namespace {

using FloatRows = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DoubleRows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Layout {
  std::int64_t n, c, h, w;
  bool rank3;
  std::int64_t sites() const { return h * w; }
  std::int64_t item() const { return c * h * w; }
};

Layout layout_of(const Tensor& t, const char* what) {
  check(t.rank() == 3 || t.rank() == 4, ErrorCode::kShapeMismatch,
        std::string(what) + " expects [C,H,W] or [N,C,H,W], got " +
            shape_to_string(t.shape()));
  if (t.rank() == 3) return {1, t.dim(0), t.dim(1), t.dim(2), true};
  return {t.dim(0), t.dim(1), t.dim(2), t.dim(3), false};
}

void check_pair(const Layout& c, const Layout& s, const char* what) {
  check(c.c == s.c, ErrorCode::kShapeMismatch,
        std::string(what) + ": content has " + std::to_string(c.c) +
            " channels, style has " + std::to_string(s.c));
  check(s.n == 1 || s.n == c.n, ErrorCode::kShapeMismatch,
        std::string(what) + ": style batch must be 1 or match content batch");
}

DoubleRows load_block(const float* f, std::int64_t channels, std::int64_t sites) {
  return Eigen::Map<const FloatRows>(f, channels, sites).cast<double>();
}

void store_block(const DoubleRows& m, float* out) {
  Eigen::Map<FloatRows>(out, m.rows(), m.cols()) = m.cast<float>();
}

// E diag(lambda^p) E^T with the eigenvalue floor applied.
Matrix eigen_power(const SymEigen& eig, double power) {
  Vector scaled = eig.values.unaryExpr(
      [power](double v) { return std::pow(std::max(v, kEigenFloor), power); });
  return eig.vectors * scaled.asDiagonal() * eig.vectors.transpose();
}

DoubleRows whiten_block(const float* f, std::int64_t channels, std::int64_t sites,
                        const FeatureStats& stats) {
  DoubleRows x = load_block(f, channels, sites);
  x.colwise() -= stats.mean;
  return eigen_power(stats.eig, -0.5) * x;
}

DoubleRows color_block(const DoubleRows& whitened, const FeatureStats& style) {
  DoubleRows out = eigen_power(style.eig, 0.5) * whitened;
  out.colwise() += style.mean;
  return out;
}

Tensor make_like(const Layout& l) {
  if (l.rank3) return Tensor(Shape{l.c, l.h, l.w});
  return Tensor(Shape{l.n, l.c, l.h, l.w});
}

}  // namespace

Matrix gram_matrix(const Tensor& f) {
  const Layout l = layout_of(f, "gram");
  check(l.n == 1, ErrorCode::kShapeMismatch, "gram_matrix takes a single feature map");
  DoubleRows x = load_block(f.data().data(), l.c, l.sites());
  return (x * x.transpose()) / static_cast<double>(l.item());
}

Tensor gram(const Tensor& f) {
  check(f.rank() == 4, ErrorCode::kShapeMismatch, "gram expects [N,C,H,W]");
  const Layout l = layout_of(f, "gram");
  const double norm = static_cast<double>(l.item());
  Tensor out(Shape{l.n, l.c, l.c});
  for (std::int64_t n = 0; n < l.n; ++n) {
    DoubleRows x = load_block(f.data().data() + n * l.item(), l.c, l.sites());
    DoubleRows g = (x * x.transpose()) / norm;
    store_block(g, out.mutable_data().data() + n * l.c * l.c);
  }
  if (detail::should_record({&f})) {
    GradTape::active()->record(out, [f, l, norm](std::span<const float> go) mutable {
      std::vector<float> gf(f.data().size());
      for (std::int64_t n = 0; n < l.n; ++n) {
        DoubleRows g = load_block(go.data() + n * l.c * l.c, l.c, l.c);
        DoubleRows x = load_block(f.data().data() + n * l.item(), l.c, l.sites());
        DoubleRows d = ((g + g.transpose()) * x) / norm;
        store_block(d, gf.data() + n * l.item());
      }
      f.accumulate_grad(gf);
    });
  }
  return out;
}

FeatureStats feature_stats(const float* f, std::int64_t channels, std::int64_t sites) {
  check(sites >= 2, ErrorCode::kShapeMismatch,
        "feature statistics need at least two spatial sites");
  DoubleRows x = load_block(f, channels, sites);
  FeatureStats stats;
  stats.mean = x.rowwise().mean();
  x.colwise() -= stats.mean;
  stats.covariance = (x * x.transpose()) / static_cast<double>(sites - 1);
  stats.covariance.diagonal().array() += kCovarianceEpsilon;
  stats.eig = eig_sym(stats.covariance);
  return stats;
}

Tensor whiten(const Tensor& f) {
  const Layout l = layout_of(f, "whiten");
  Tensor out = make_like(l);
  for (std::int64_t n = 0; n < l.n; ++n) {
    const float* src = f.data().data() + n * l.item();
    const FeatureStats stats = feature_stats(src, l.c, l.sites());
    store_block(whiten_block(src, l.c, l.sites(), stats),
                out.mutable_data().data() + n * l.item());
  }
  detail::check_finite(out, "whiten");
  return out;
}

Tensor wct(const Tensor& f_c, const Tensor& f_s) {
  const Layout lc = layout_of(f_c, "wct");
  const Layout ls = layout_of(f_s, "wct");
  check_pair(lc, ls, "wct");
  Tensor out = make_like(lc);
  for (std::int64_t n = 0; n < lc.n; ++n) {
    const float* c = f_c.data().data() + n * lc.item();
    const float* s = f_s.data().data() + (ls.n == 1 ? 0 : n) * ls.item();
    const FeatureStats cs = feature_stats(c, lc.c, lc.sites());
    const FeatureStats ss = feature_stats(s, ls.c, ls.sites());
    store_block(color_block(whiten_block(c, lc.c, lc.sites(), cs), ss),
                out.mutable_data().data() + n * lc.item());
  }
  detail::check_finite(out, "wct");
  return out;
}

namespace {

struct ChannelStats {
  std::vector<double> mean, std;
};

ChannelStats channel_stats(const float* f, std::int64_t channels, std::int64_t sites) {
  ChannelStats st;
  st.mean.resize(static_cast<std::size_t>(channels));
  st.std.resize(static_cast<std::size_t>(channels));
  for (std::int64_t c = 0; c < channels; ++c) {
    const float* p = f + c * sites;
    double m = 0.0;
    for (std::int64_t i = 0; i < sites; ++i) m += p[i];
    m /= static_cast<double>(sites);
    double v = 0.0;
    for (std::int64_t i = 0; i < sites; ++i) v += (p[i] - m) * (p[i] - m);
    st.mean[c] = m;
    st.std[c] = std::sqrt(v / static_cast<double>(sites));
  }
  return st;
}

}  // namespace

Tensor stat_match(const Tensor& f_c, const Tensor& f_s) {
  const Layout lc = layout_of(f_c, "stat_match");
  const Layout ls = layout_of(f_s, "stat_match");
  check_pair(lc, ls, "stat_match");
  Tensor out = make_like(lc);
  const double eps = kStatEpsilon;
  for (std::int64_t n = 0; n < lc.n; ++n) {
    const float* c = f_c.data().data() + n * lc.item();
    const float* s = f_s.data().data() + (ls.n == 1 ? 0 : n) * ls.item();
    const ChannelStats cs = channel_stats(c, lc.c, lc.sites());
    const ChannelStats ss = channel_stats(s, ls.c, ls.sites());
    float* o = out.mutable_data().data() + n * lc.item();
    for (std::int64_t ch = 0; ch < lc.c; ++ch) {
      const double inv = 1.0 / std::max(cs.std[ch], eps);
      for (std::int64_t i = 0; i < lc.sites(); ++i) {
        const std::int64_t k = ch * lc.sites() + i;
        o[k] = static_cast<float>((c[k] - cs.mean[ch]) * inv * ss.std[ch] + ss.mean[ch]);
      }
    }
  }
  detail::check_finite(out, "stat_match");
  if (detail::should_record({&f_c, &f_s})) {
    GradTape::active()->record(out, [f_c, f_s, lc, ls, eps](
                                        std::span<const float> go) mutable {
      std::vector<float> gc(f_c.requires_grad() ? f_c.data().size() : 0, 0.0f);
      std::vector<double> gs(f_s.requires_grad() ? f_s.data().size() : 0, 0.0);
      const double m = static_cast<double>(lc.sites());
      const double ms = static_cast<double>(ls.sites());
      for (std::int64_t n = 0; n < lc.n; ++n) {
        const std::int64_t sn = ls.n == 1 ? 0 : n;
        const float* c = f_c.data().data() + n * lc.item();
        const float* s = f_s.data().data() + sn * ls.item();
        const ChannelStats cs = channel_stats(c, lc.c, lc.sites());
        const ChannelStats ss = channel_stats(s, ls.c, ls.sites());
        const float* g = go.data() + n * lc.item();
        for (std::int64_t ch = 0; ch < lc.c; ++ch) {
          const std::int64_t base = ch * lc.sites();
          const bool live = cs.std[ch] > eps;
          const double denom = std::max(cs.std[ch], eps);
          double sum_g = 0.0, sum_gx = 0.0;
          for (std::int64_t i = 0; i < lc.sites(); ++i) {
            const double xhat = (c[base + i] - cs.mean[ch]) / denom;
            sum_g += g[base + i];
            sum_gx += g[base + i] * xhat;
          }
          if (!gc.empty()) {
            // d out / d xhat = sigma_s; normalisation backward on top.
            const double mean_gh = sum_g * ss.std[ch] / m;
            const double mean_ghx = sum_gx * ss.std[ch] / m;
            for (std::int64_t i = 0; i < lc.sites(); ++i) {
              const double xhat = (c[base + i] - cs.mean[ch]) / denom;
              double d = g[base + i] * ss.std[ch] - mean_gh;
              if (live) d -= xhat * mean_ghx;
              gc[n * lc.item() + base + i] += static_cast<float>(d / denom);
            }
          }
          if (!gs.empty()) {
            const std::int64_t sbase = sn * ls.item() + ch * ls.sites();
            for (std::int64_t i = 0; i < ls.sites(); ++i) {
              double d = sum_g / ms;
              if (ss.std[ch] > 0.0) {
                d += sum_gx * (s[ch * ls.sites() + i] - ss.mean[ch]) / (ms * ss.std[ch]);
              }
              gs[sbase + i] += d;
            }
          }
        }
      }
      if (!gc.empty()) f_c.accumulate_grad(gc);
      if (!gs.empty()) f_s.accumulate_grad(std::vector<float>(gs.begin(), gs.end()));
    });
  }
  return out;
}

namespace {

std::vector<std::int64_t> patch_starts(std::int64_t extent, int patch, int stride) {
  std::vector<std::int64_t> starts;
  for (std::int64_t p = 0; p + patch <= extent; p += stride) starts.push_back(p);
  if (starts.back() != extent - patch) starts.push_back(extent - patch);
  return starts;
}

// Rows are flattened [C, patch, patch] windows of a [C, H, W] block.
DoubleRows extract_patches(const DoubleRows& f, std::int64_t h, std::int64_t w,
                           const std::vector<std::int64_t>& ys,
                           const std::vector<std::int64_t>& xs, int patch) {
  const std::int64_t channels = f.rows();
  DoubleRows out(static_cast<Eigen::Index>(ys.size() * xs.size()), channels * patch * patch);
  Eigen::Index row = 0;
  for (auto y : ys) {
    for (auto x : xs) {
      Eigen::Index col = 0;
      for (std::int64_t c = 0; c < channels; ++c)
        for (int dy = 0; dy < patch; ++dy)
          for (int dx = 0; dx < patch; ++dx) out(row, col++) = f(c, (y + dy) * w + x + dx);
      ++row;
    }
  }
  (void)h;
  return out;
}

struct MatchPlan {
  DoubleRows content_white, style_white;
  FeatureStats style_stats;
  std::vector<std::int64_t> cys, cxs, sys, sxs;
  std::vector<std::int64_t> best;
};

MatchPlan plan_matches(const float* c, const Layout& lc, const float* s, const Layout& ls,
                       int patch, int stride) {
  check(patch >= 1 && patch % 2 == 1, ErrorCode::kInvalidArgument,
        "style_decorator: patch size must be odd");
  check(stride >= 1, ErrorCode::kInvalidArgument, "style_decorator: stride must be >= 1");
  check(lc.h >= patch && lc.w >= patch && ls.h >= patch && ls.w >= patch,
        ErrorCode::kShapeMismatch,
        "style_decorator: feature extent smaller than patch " + std::to_string(patch));
  MatchPlan plan;
  const FeatureStats cstats = feature_stats(c, lc.c, lc.sites());
  plan.style_stats = feature_stats(s, ls.c, ls.sites());
  plan.content_white = whiten_block(c, lc.c, lc.sites(), cstats);
  plan.style_white = whiten_block(s, ls.c, ls.sites(), plan.style_stats);
  plan.cys = patch_starts(lc.h, patch, stride);
  plan.cxs = patch_starts(lc.w, patch, stride);
  plan.sys = patch_starts(ls.h, patch, 1);
  plan.sxs = patch_starts(ls.w, patch, 1);

  const DoubleRows cp = extract_patches(plan.content_white, lc.h, lc.w, plan.cys, plan.cxs, patch);
  DoubleRows sp = extract_patches(plan.style_white, ls.h, ls.w, plan.sys, plan.sxs, patch);
  for (Eigen::Index r = 0; r < sp.rows(); ++r) {
    sp.row(r) /= std::max(sp.row(r).norm(), 1e-8);
  }
  const DoubleRows scores = cp * sp.transpose();
  plan.best.resize(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index at = 0;
    double top = scores(r, 0);
    for (Eigen::Index k = 1; k < scores.cols(); ++k) {
      if (scores(r, k) > top) {
        top = scores(r, k);
        at = k;
      }
    }
    plan.best[static_cast<std::size_t>(r)] = at;
  }
  return plan;
}

}  // namespace

PatchMatchResult style_decorator_matches(const Tensor& f_c, const Tensor& f_s, int patch,
                                         int stride) {
  const Layout lc = layout_of(f_c, "style_decorator");
  const Layout ls = layout_of(f_s, "style_decorator");
  check_pair(lc, ls, "style_decorator");
  check(lc.n == 1 && ls.n == 1, ErrorCode::kShapeMismatch,
        "style_decorator_matches takes single feature maps");
  const MatchPlan plan =
      plan_matches(f_c.data().data(), lc, f_s.data().data(), ls, patch, stride);
  PatchMatchResult result;
  for (auto y : plan.cys)
    for (auto x : plan.cxs) result.content_positions.push_back(y * lc.w + x);
  result.best_style_patch = plan.best;
  result.style_grid_width = static_cast<std::int64_t>(plan.sxs.size());
  return result;
}

Tensor style_decorator(const Tensor& f_c, const Tensor& f_s, int patch, int stride) {
  const Layout lc = layout_of(f_c, "style_decorator");
  const Layout ls = layout_of(f_s, "style_decorator");
  check_pair(lc, ls, "style_decorator");
  Tensor out = make_like(lc);
  for (std::int64_t n = 0; n < lc.n; ++n) {
    const float* c = f_c.data().data() + n * lc.item();
    const float* s = f_s.data().data() + (ls.n == 1 ? 0 : n) * ls.item();
    const MatchPlan plan = plan_matches(c, lc, s, ls, patch, stride);

    DoubleRows acc = DoubleRows::Zero(lc.c, lc.sites());
    std::vector<double> count(static_cast<std::size_t>(lc.sites()), 0.0);
    std::size_t k = 0;
    for (auto cy : plan.cys) {
      for (auto cx : plan.cxs) {
        const auto best = plan.best[k++];
        const std::int64_t sy = plan.sys[static_cast<std::size_t>(best) / plan.sxs.size()];
        const std::int64_t sx = plan.sxs[static_cast<std::size_t>(best) % plan.sxs.size()];
        for (int dy = 0; dy < patch; ++dy) {
          for (int dx = 0; dx < patch; ++dx) {
            const std::int64_t dst = (cy + dy) * lc.w + cx + dx;
            const std::int64_t src = (sy + dy) * ls.w + sx + dx;
            acc.col(dst) += plan.style_white.col(src);
            count[static_cast<std::size_t>(dst)] += 1.0;
          }
        }
      }
    }
    for (std::int64_t i = 0; i < lc.sites(); ++i) acc.col(i) /= count[static_cast<std::size_t>(i)];
    store_block(color_block(acc, plan.style_stats), out.mutable_data().data() + n * lc.item());
  }
  detail::check_finite(out, "style_decorator");
  return out;
}

Tensor blend_transform(const Tensor& f_c, const Tensor& f_s, double alpha) {
  check(alpha >= 0.0 && alpha <= 1.0, ErrorCode::kInvalidArgument,
        "blend weight must lie in [0, 1], got " + std::to_string(alpha));
  if (alpha == 0.0) return wct(f_c, f_s);
  if (alpha == 1.0) return style_decorator(f_c, f_s);
  const Tensor sd = style_decorator(f_c, f_s);
  const Tensor uw = wct(f_c, f_s);
  Tensor out(sd.shape());
  auto o = out.mutable_data();
  const float a = static_cast<float>(alpha);
  const float b = static_cast<float>(1.0 - alpha);
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a * sd.data()[i] + b * uw.data()[i];
  return out;
}

}  // namespace domstyle
