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

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "domstyle/tensor.hpp"

namespace domstyle {

// Division and log inputs are kept at least this far from zero.
inline constexpr float kGuardEpsilon = 1e-8f;

enum class ElementOp {
  kAdd,
  kSub,
  kMul,
  kDiv,
  kRelu,
  kLeakyRelu,
  kSigmoid,
  kLog,
  kExp,
  kAbs,
  kPow,
};

// Binary ops take equal shapes or a single-element operand on either side.
// `param` is the leaky slope or the power exponent.
Tensor elementwise(ElementOp op, const Tensor& a, const Tensor* b = nullptr,
                   float param = 0.0f);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, float slope);
Tensor sigmoid(const Tensor& x);
Tensor log(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor pow(const Tensor& x, float k);

Tensor scale(const Tensor& x, float s);
Tensor add_scalar(const Tensor& x, float s);
Tensor clamp(const Tensor& x, float lo, float hi);

// Full reductions to a single-element tensor, accumulated in double.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

enum class PadMode { kZero, kReflect };

// x:[N,Cin,H,W] w:[Cout,Cin,kh,kw] b:[Cout] (b may be undefined).
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
              PadMode pad, int pad_size);

enum class PoolKind { kAvg, kMax };
Tensor pool2d(const Tensor& x, PoolKind kind, int k = 2, int stride = 2);
Tensor upsample_nearest(const Tensor& x, int factor);

// [N,C,H,W] -> [N,C]
Tensor global_avg_pool(const Tensor& x);
// [N,C] -> [N,C,H,W]
Tensor broadcast_spatial(const Tensor& x, std::int64_t h, std::int64_t w);

Tensor reshape(const Tensor& x, Shape shape);
Tensor concat_channels(const std::vector<Tensor>& parts);
Tensor concat_batch(const std::vector<Tensor>& parts);
Tensor slice_batch(const Tensor& x, std::int64_t start, std::int64_t count);
Tensor crop(const Tensor& x, std::int64_t top, std::int64_t left,
            std::int64_t height, std::int64_t width);

// a:[M,K] b:[K,N] -> [M,N]
Tensor matmul(const Tensor& a, const Tensor& b);
// x:[N,in] w:[out,in] b:[out] -> [N,out]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

namespace detail {

// True when an active tape exists and any input is tracked.
bool should_record(std::initializer_list<const Tensor*> inputs);
bool should_record(const std::vector<Tensor>& inputs);
void check_finite(const Tensor& t, const char* op);

// Mirror-reflect an index into [0, n) (period 2(n-1)).
inline std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace detail
}  // namespace domstyle
