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

#include "domstyle/tensor.hpp"

#include <cmath>

#include <algorithm>
#include <sstream>

#include "domstyle/error.hpp"

namespace domstyle {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void validate_shape(const Shape& shape) {
  check(shape.size() <= 4, ErrorCode::kShapeMismatch,
        "tensor rank must be <= 4, got " + shape_to_string(shape));
  for (auto d : shape) {
    check(d > 0, ErrorCode::kShapeMismatch,
          "tensor extents must be positive, got " + shape_to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, float fill) {
  validate_shape(shape);
  check(std::isfinite(fill), ErrorCode::kNonFinite, "tensor fill value must be finite");
  impl_ = std::make_shared<detail::TensorImpl>();
  impl_->data.assign(static_cast<std::size_t>(shape_numel(shape)), fill);
  impl_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<float> values) {
  validate_shape(shape);
  check(static_cast<std::int64_t>(values.size()) == shape_numel(shape),
        ErrorCode::kShapeMismatch,
        "value count " + std::to_string(values.size()) +
            " does not match shape " + shape_to_string(shape));
  for (float v : values) {
    check(std::isfinite(v), ErrorCode::kNonFinite, "tensor values must be finite");
  }
  impl_ = std::make_shared<detail::TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
}

Tensor Tensor::scalar(float value) { return Tensor(Shape{1}, value); }

const Shape& Tensor::shape() const {
  check(defined(), ErrorCode::kInvalidArgument, "use of undefined tensor");
  return impl_->shape;
}

std::int64_t Tensor::dim(int axis) const {
  const auto& s = shape();
  check(axis >= 0 && axis < static_cast<int>(s.size()),
        ErrorCode::kShapeMismatch,
        "axis " + std::to_string(axis) + " out of range for " +
            shape_to_string(s));
  return s[static_cast<std::size_t>(axis)];
}

std::int64_t Tensor::numel() const {
  return static_cast<std::int64_t>(impl_ ? impl_->data.size() : 0);
}

std::span<const float> Tensor::data() const {
  check(defined(), ErrorCode::kInvalidArgument, "use of undefined tensor");
  return impl_->data;
}

std::span<float> Tensor::mutable_data() {
  check(defined(), ErrorCode::kInvalidArgument, "use of undefined tensor");
  return impl_->data;
}

float Tensor::item() const {
  check(numel() == 1, ErrorCode::kShapeMismatch,
        "item() requires a single-element tensor, got " +
            shape_to_string(shape()));
  return impl_->data[0];
}

float Tensor::at(std::int64_t n, std::int64_t c, std::int64_t h,
                 std::int64_t w) const {
  const auto& s = shape();
  check(s.size() == 4, ErrorCode::kShapeMismatch, "at() needs a rank-4 tensor");
  return impl_->data[static_cast<std::size_t>(((n * s[1] + c) * s[2] + h) * s[3] + w)];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  check(defined(), ErrorCode::kInvalidArgument, "use of undefined tensor");
  impl_->requires_grad = on;
  return *this;
}

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }

std::span<const float> Tensor::grad() const {
  check(has_grad(), ErrorCode::kGradient, "tensor has no gradient");
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (impl_) impl_->grad.clear();
}

void Tensor::accumulate_grad(std::span<const float> g) const {
  check(static_cast<std::int64_t>(g.size()) == numel(), ErrorCode::kShapeMismatch,
        "gradient size does not match tensor " + shape_to_string(shape()));
  auto& buf = impl_->grad;
  if (buf.empty()) {
    buf.assign(g.begin(), g.end());
    return;
  }
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

Tensor Tensor::detach() const {
  return Tensor(shape(), std::vector<float>(impl_->data));
}

namespace {
thread_local GradTape* g_active_tape = nullptr;
}  // namespace

GradTape::GradTape() : previous_(g_active_tape) { g_active_tape = this; }

GradTape::~GradTape() {
  // Tapes are strictly scoped; restoring the previous one keeps nesting sane.
  g_active_tape = previous_;
}

GradTape* GradTape::active() { return g_active_tape; }

void GradTape::record(Tensor output, BackwardFn fn) {
  check(!consumed_, ErrorCode::kGradient, "recording on a consumed tape");
  output.set_requires_grad(true);
  entries_.push_back(Entry{std::move(output), std::move(fn)});
}

void GradTape::backward(const Tensor& loss) {
  check(!consumed_, ErrorCode::kGradient,
        "backward called twice on the same tape (double backward is unsupported)");
  check(loss.defined() && loss.numel() == 1, ErrorCode::kGradient,
        "backward requires a scalar loss");
  check(loss.requires_grad(), ErrorCode::kGradient,
        "loss is not connected to any tracked tensor");
  consumed_ = true;
  const float one = 1.0f;
  Tensor root = loss;
  root.accumulate_grad(std::span<const float>(&one, 1));
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (!it->output.has_grad()) continue;
    it->fn(it->output.grad());
  }
  entries_.clear();
  entries_.shrink_to_fit();
}

void backward(const Tensor& loss) {
  GradTape* tape = GradTape::active();
  check(tape != nullptr, ErrorCode::kGradient, "backward without an active tape");
  tape->backward(loss);
}

}  // namespace domstyle
