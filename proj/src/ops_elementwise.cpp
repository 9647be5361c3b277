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

#include <algorithm>
#include <cmath>
#include <string>

#include "domstyle/error.hpp"
#include "domstyle/ops.hpp"

namespace domstyle {
namespace detail {

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (GradTape::active() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t != nullptr && t->requires_grad()) return true;
  }
  return false;
}

bool should_record(const std::vector<Tensor>& inputs) {
  if (GradTape::active() == nullptr) return false;
  for (const auto& t : inputs) {
    if (t.requires_grad()) return true;
  }
  return false;
}

void check_finite(const Tensor& t, const char* op) {
  for (float v : t.data()) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::kNonFinite, std::string(op) + " produced a non-finite value");
    }
  }
}

}  // namespace detail

namespace {

bool is_binary(ElementOp op) {
  return op == ElementOp::kAdd || op == ElementOp::kSub ||
         op == ElementOp::kMul || op == ElementOp::kDiv;
}

const char* op_name(ElementOp op) {
  switch (op) {
    case ElementOp::kAdd: return "add";
    case ElementOp::kSub: return "sub";
    case ElementOp::kMul: return "mul";
    case ElementOp::kDiv: return "div";
    case ElementOp::kRelu: return "relu";
    case ElementOp::kLeakyRelu: return "leaky_relu";
    case ElementOp::kSigmoid: return "sigmoid";
    case ElementOp::kLog: return "log";
    case ElementOp::kExp: return "exp";
    case ElementOp::kAbs: return "abs";
    case ElementOp::kPow: return "pow";
  }
  return "elementwise";
}

float guard_denominator(float b) {
  if (b >= 0.0f) return std::max(b, kGuardEpsilon);
  return std::min(b, -kGuardEpsilon);
}

float stable_sigmoid(float x) {
  if (x >= 0.0f) {
    const float z = std::exp(-x);
    return 1.0f / (1.0f + z);
  }
  const float z = std::exp(x);
  return z / (1.0f + z);
}

Tensor binary(ElementOp op, const Tensor& a, const Tensor& b) {
  const bool a_scalar = a.numel() == 1 && b.numel() != 1;
  const bool b_scalar = b.numel() == 1 && a.numel() != 1;
  if (!a_scalar && !b_scalar) {
    check(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
          std::string(op_name(op)) + ": shapes " + shape_to_string(a.shape()) +
              " and " + shape_to_string(b.shape()) + " differ");
  }
  const Shape& out_shape = a_scalar ? b.shape() : a.shape();
  Tensor out(out_shape);
  auto o = out.mutable_data();
  auto ad = a.data();
  auto bd = b.data();
  const std::size_t n = o.size();
  for (std::size_t i = 0; i < n; ++i) {
    const float x = ad[a_scalar ? 0 : i];
    const float y = bd[b_scalar ? 0 : i];
    switch (op) {
      case ElementOp::kAdd: o[i] = x + y; break;
      case ElementOp::kSub: o[i] = x - y; break;
      case ElementOp::kMul: o[i] = x * y; break;
      case ElementOp::kDiv: o[i] = x / guard_denominator(y); break;
      default: break;
    }
  }
  detail::check_finite(out, op_name(op));
  if (detail::should_record({&a, &b})) {
    GradTape::active()->record(out, [op, a, b, a_scalar, b_scalar, n](
                                        std::span<const float> g) mutable {
      auto ad = a.data();
      auto bd = b.data();
      if (a.requires_grad()) {
        std::vector<float> ga(a.data().size(), 0.0f);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const float y = bd[b_scalar ? 0 : i];
          float d = 0.0f;
          switch (op) {
            case ElementOp::kAdd:
            case ElementOp::kSub: d = g[i]; break;
            case ElementOp::kMul: d = g[i] * y; break;
            case ElementOp::kDiv: d = g[i] / guard_denominator(y); break;
            default: break;
          }
          if (a_scalar) {
            acc += d;
          } else {
            ga[i] = d;
          }
        }
        if (a_scalar) ga[0] = static_cast<float>(acc);
        a.accumulate_grad(ga);
      }
      if (b.requires_grad()) {
        std::vector<float> gb(b.data().size(), 0.0f);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const float x = ad[a_scalar ? 0 : i];
          const float y = bd[b_scalar ? 0 : i];
          float d = 0.0f;
          switch (op) {
            case ElementOp::kAdd: d = g[i]; break;
            case ElementOp::kSub: d = -g[i]; break;
            case ElementOp::kMul: d = g[i] * x; break;
            case ElementOp::kDiv: {
              const bool guarded = std::fabs(y) < kGuardEpsilon;
              const float yg = guard_denominator(y);
              d = guarded ? 0.0f : -g[i] * x / (yg * yg);
              break;
            }
            default: break;
          }
          if (b_scalar) {
            acc += d;
          } else {
            gb[i] = d;
          }
        }
        if (b_scalar) gb[0] = static_cast<float>(acc);
        b.accumulate_grad(gb);
      }
    });
  }
  return out;
}

Tensor unary(ElementOp op, const Tensor& x, float param) {
  Tensor out(x.shape());
  auto o = out.mutable_data();
  auto xd = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const float v = xd[i];
    switch (op) {
      case ElementOp::kRelu: o[i] = v > 0.0f ? v : 0.0f; break;
      case ElementOp::kLeakyRelu: o[i] = v > 0.0f ? v : param * v; break;
      case ElementOp::kSigmoid: o[i] = stable_sigmoid(v); break;
      case ElementOp::kLog: o[i] = std::log(std::max(v, kGuardEpsilon)); break;
      case ElementOp::kExp: o[i] = std::exp(v); break;
      case ElementOp::kAbs: o[i] = std::fabs(v); break;
      case ElementOp::kPow: o[i] = std::pow(v, param); break;
      default: break;
    }
  }
  detail::check_finite(out, op_name(op));
  if (detail::should_record({&x})) {
    GradTape::active()->record(out, [op, x, param,
                                     y = std::vector<float>(o.begin(), o.end())](
                                        std::span<const float> g) mutable {
      auto xd = x.data();
      std::vector<float> gx(xd.size());
      for (std::size_t i = 0; i < gx.size(); ++i) {
        const float v = xd[i];
        float d = 0.0f;
        switch (op) {
          case ElementOp::kRelu: d = v > 0.0f ? 1.0f : 0.0f; break;
          case ElementOp::kLeakyRelu: d = v > 0.0f ? 1.0f : param; break;
          case ElementOp::kSigmoid: d = y[i] * (1.0f - y[i]); break;
          case ElementOp::kLog: d = v > kGuardEpsilon ? 1.0f / v : 0.0f; break;
          case ElementOp::kExp: d = y[i]; break;
          case ElementOp::kAbs: d = v > 0.0f ? 1.0f : (v < 0.0f ? -1.0f : 0.0f); break;
          case ElementOp::kPow: d = param * std::pow(v, param - 1.0f); break;
          default: break;
        }
        gx[i] = g[i] * d;
      }
      x.accumulate_grad(gx);
    });
  }
  return out;
}

}  // namespace

Tensor elementwise(ElementOp op, const Tensor& a, const Tensor* b, float param) {
  if (is_binary(op)) {
    check(b != nullptr, ErrorCode::kInvalidArgument,
          std::string(op_name(op)) + " needs two operands");
    return binary(op, a, *b);
  }
  check(b == nullptr, ErrorCode::kInvalidArgument,
        std::string(op_name(op)) + " takes one operand");
  return unary(op, a, param);
}

Tensor add(const Tensor& a, const Tensor& b) { return binary(ElementOp::kAdd, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(ElementOp::kSub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(ElementOp::kMul, a, b); }
Tensor div(const Tensor& a, const Tensor& b) { return binary(ElementOp::kDiv, a, b); }
Tensor relu(const Tensor& x) { return unary(ElementOp::kRelu, x, 0.0f); }
Tensor leaky_relu(const Tensor& x, float slope) {
  return unary(ElementOp::kLeakyRelu, x, slope);
}
Tensor sigmoid(const Tensor& x) { return unary(ElementOp::kSigmoid, x, 0.0f); }
Tensor log(const Tensor& x) { return unary(ElementOp::kLog, x, 0.0f); }
Tensor exp(const Tensor& x) { return unary(ElementOp::kExp, x, 0.0f); }
Tensor abs(const Tensor& x) { return unary(ElementOp::kAbs, x, 0.0f); }
Tensor pow(const Tensor& x, float k) { return unary(ElementOp::kPow, x, k); }

Tensor scale(const Tensor& x, float s) { return mul(x, Tensor::scalar(s)); }
Tensor add_scalar(const Tensor& x, float s) { return add(x, Tensor::scalar(s)); }

Tensor clamp(const Tensor& x, float lo, float hi) {
  check(lo <= hi, ErrorCode::kInvalidArgument, "clamp: lo > hi");
  Tensor out(x.shape());
  auto o = out.mutable_data();
  auto xd = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::clamp(xd[i], lo, hi);
  if (detail::should_record({&x})) {
    GradTape::active()->record(out, [x, lo, hi](std::span<const float> g) mutable {
      auto xd = x.data();
      std::vector<float> gx(xd.size());
      for (std::size_t i = 0; i < gx.size(); ++i) {
        gx[i] = (xd[i] >= lo && xd[i] <= hi) ? g[i] : 0.0f;
      }
      x.accumulate_grad(gx);
    });
  }
  return out;
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  Tensor out = Tensor::scalar(static_cast<float>(acc));
  detail::check_finite(out, "sum");
  if (detail::should_record({&x})) {
    GradTape::active()->record(out, [x](std::span<const float> g) mutable {
      x.accumulate_grad(std::vector<float>(x.data().size(), g[0]));
    });
  }
  return out;
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.numel());
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  Tensor out = Tensor::scalar(static_cast<float>(acc / n));
  detail::check_finite(out, "mean");
  if (detail::should_record({&x})) {
    GradTape::active()->record(out, [x, n](std::span<const float> g) mutable {
      x.accumulate_grad(
          std::vector<float>(x.data().size(), static_cast<float>(g[0] / n)));
    });
  }
  return out;
}

}  // namespace domstyle
