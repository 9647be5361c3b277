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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace domstyle {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {
struct TensorImpl {
  Shape shape;
  std::vector<float> data;
  std::vector<float> grad;
  bool requires_grad = false;
};
}  // namespace detail

// Dense rank<=4 float array, NCHW when rank 4. Copies share storage; values
// are treated as immutable once an op has produced them. Parameters are the
// only tensors mutated in place (by optimizers).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> values);

  static Tensor scalar(float value);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  int rank() const { return static_cast<int>(shape().size()); }
  std::int64_t dim(int axis) const;
  std::int64_t numel() const;

  std::span<const float> data() const;
  std::span<float> mutable_data();
  float item() const;
  float at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on);
  bool has_grad() const;
  std::span<const float> grad() const;
  void zero_grad();
  // Gradient buffers live beside the shared storage, so this is const.
  void accumulate_grad(std::span<const float> g) const;

  // New storage holding the same values and no gradient history.
  Tensor detach() const;
  bool is_same(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

// Reverse-mode record of differentiable ops executed while the tape is the
// innermost active tape on this thread. Entries are replayed in reverse by
// backward(); a tape can be consumed only once.
class GradTape {
 public:
  using BackwardFn = std::function<void(std::span<const float> grad_out)>;

  GradTape();
  ~GradTape();
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  static GradTape* active();

  void record(Tensor output, BackwardFn fn);
  void backward(const Tensor& loss);

  std::size_t size() const { return entries_.size(); }
  bool consumed() const { return consumed_; }

 private:
  struct Entry {
    Tensor output;
    BackwardFn fn;
  };
  std::vector<Entry> entries_;
  GradTape* previous_ = nullptr;
  bool consumed_ = false;
};

// Runs backward on the innermost active tape.
void backward(const Tensor& loss);

}  // namespace domstyle
