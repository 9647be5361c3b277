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

#include "domstyle/weights.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include <json.hpp>

#include "domstyle/error.hpp"
#include "domstyle/image.hpp"

namespace domstyle {

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian; big-endian hosts need byte swapping");

void WeightStore::add(const std::string& name, Tensor tensor) {
  check(!name.empty(), ErrorCode::kInvalidArgument, "weight name must not be empty");
  check(tensor.defined(), ErrorCode::kInvalidArgument, "weight '" + name + "' is undefined");
  check(index_.count(name) == 0, ErrorCode::kDuplicateName,
        "weight '" + name + "' already present");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(name, std::move(tensor));
}

bool WeightStore::contains(const std::string& name) const { return index_.count(name) != 0; }

Tensor WeightStore::get(const std::string& name) const {
  auto it = index_.find(name);
  check(it != index_.end(), ErrorCode::kMissingWeight, "weight '" + name + "' not found");
  return entries_[it->second].second;
}

std::vector<Tensor> WeightStore::with_prefix(const std::string& prefix) const {
  std::vector<Tensor> out;
  for (const auto& [name, t] : entries_) {
    if (name.rfind(prefix, 0) == 0) out.push_back(t);
  }
  return out;
}

std::int64_t WeightStore::parameter_count() const { return parameter_count(""); }

std::int64_t WeightStore::parameter_count(const std::string& prefix) const {
  std::int64_t total = 0;
  for (const auto& t : with_prefix(prefix)) total += t.numel();
  return total;
}

WeightStore WeightStore::clone() const {
  WeightStore out;
  out.format_version = format_version;
  for (const auto& [name, t] : entries_) {
    Tensor copy = t.detach();
    copy.set_requires_grad(t.requires_grad());
    out.add(name, copy);
  }
  return out;
}

std::vector<std::uint8_t> serialize_weights(const WeightStore& ws) {
  nlohmann::json manifest;
  manifest["format_version"] = ws.format_version;
  manifest["tensors"] = nlohmann::json::array();
  std::size_t payload = 0;
  for (const auto& [name, t] : ws.entries()) {
    for (float v : t.data()) {
      check(std::isfinite(v), ErrorCode::kNonFinite, "weight '" + name + "' is not finite");
    }
    manifest["tensors"].push_back({{"name", name}, {"dtype", "f32"}, {"shape", t.shape()}});
    payload += t.data().size() * sizeof(float);
  }
  const std::string text = manifest.dump();
  const auto len = static_cast<std::uint32_t>(text.size());

  std::vector<std::uint8_t> bytes;
  bytes.reserve(sizeof(kWeightMagic) + 4 + text.size() + payload);
  bytes.insert(bytes.end(), kWeightMagic, kWeightMagic + sizeof(kWeightMagic));
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  bytes.insert(bytes.end(), text.begin(), text.end());
  for (const auto& entry : ws.entries()) {
    auto d = entry.second.data();
    const auto* raw = reinterpret_cast<const std::uint8_t*>(d.data());
    bytes.insert(bytes.end(), raw, raw + d.size() * sizeof(float));
  }
  return bytes;
}

WeightStore deserialize_weights(const std::vector<std::uint8_t>& bytes) {
  check(bytes.size() >= sizeof(kWeightMagic) &&
            std::memcmp(bytes.data(), kWeightMagic, sizeof(kWeightMagic)) == 0,
        ErrorCode::kMagicMismatch, "not a weight file (bad magic)");
  std::size_t pos = sizeof(kWeightMagic);
  check(bytes.size() >= pos + 4, ErrorCode::kTruncatedPayload, "missing manifest length");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
  pos += 4;
  check(bytes.size() >= pos + len, ErrorCode::kTruncatedPayload, "manifest truncated");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kUnsupportedFormat, std::string("manifest is not valid JSON: ") + e.what());
  }
  pos += len;

  WeightStore ws;
  try {
    const int version = manifest.at("format_version").get<int>();
    check(version == kWeightFormatVersion, ErrorCode::kUnsupportedVersion,
          "weight format version " + std::to_string(version) + " (supported: " +
              std::to_string(kWeightFormatVersion) + ")");
    ws.format_version = version;
    for (const auto& item : manifest.at("tensors")) {
      const auto name = item.at("name").get<std::string>();
      const auto dtype = item.at("dtype").get<std::string>();
      check(dtype == "f32", ErrorCode::kUnsupportedFormat,
            "weight '" + name + "' has dtype " + dtype);
      const auto shape = item.at("shape").get<Shape>();
      check(!shape.empty() && shape.size() <= 4, ErrorCode::kUnsupportedFormat,
            "weight '" + name + "' has invalid rank");
      for (auto d : shape) {
        check(d > 0, ErrorCode::kUnsupportedFormat, "weight '" + name + "' has a bad extent");
      }
      const std::size_t count = static_cast<std::size_t>(shape_numel(shape));
      const std::size_t nbytes = count * sizeof(float);
      check(bytes.size() - pos >= nbytes, ErrorCode::kTruncatedPayload,
            "weight '" + name + "' declares " + std::to_string(count) + " floats but only " +
                std::to_string((bytes.size() - pos) / sizeof(float)) + " remain");
      std::vector<float> values(count);
      std::memcpy(values.data(), bytes.data() + pos, nbytes);
      pos += nbytes;
      ws.add(name, Tensor(shape, std::move(values)));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kUnsupportedFormat, std::string("malformed manifest: ") + e.what());
  }
  check(pos == bytes.size(), ErrorCode::kUnsupportedFormat,
        "trailing bytes after the last tensor payload");
  return ws;
}

void save_weights(const WeightStore& ws, const std::filesystem::path& path) {
  write_file(path, serialize_weights(ws));
}

WeightStore load_weights(const std::filesystem::path& path) {
  return deserialize_weights(read_file(path));
}

}  // namespace domstyle
