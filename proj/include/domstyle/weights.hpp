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
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "domstyle/tensor.hpp"

namespace domstyle {

// On-disk layout: "DSTNWGT1", u32 LE manifest length, JSON manifest listing
// {name, dtype, shape} in order, then the raw LE f32 payloads back to back.
inline constexpr char kWeightMagic[8] = {'D', 'S', 'T', 'N', 'W', 'G', 'T', '1'};
inline constexpr int kWeightFormatVersion = 1;

class WeightStore {
 public:
  void add(const std::string& name, Tensor tensor);
  bool contains(const std::string& name) const;
  // Shares storage with the stored tensor.
  Tensor get(const std::string& name) const;

  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<Tensor> with_prefix(const std::string& prefix) const;
  std::size_t size() const { return entries_.size(); }
  std::int64_t parameter_count() const;
  std::int64_t parameter_count(const std::string& prefix) const;

  // Independent copy of every tensor.
  WeightStore clone() const;

  int format_version = kWeightFormatVersion;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t> index_;
};

std::vector<std::uint8_t> serialize_weights(const WeightStore& ws);
WeightStore deserialize_weights(const std::vector<std::uint8_t>& bytes);

void save_weights(const WeightStore& ws, const std::filesystem::path& path);
WeightStore load_weights(const std::filesystem::path& path);

}  // namespace domstyle
