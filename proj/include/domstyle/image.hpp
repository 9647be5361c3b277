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
#include <vector>

#include "domstyle/tensor.hpp"

namespace domstyle {

// Binary PGM (P5, one channel) and PPM (P6, three channels) with maxval 255.
// Decoded images are [C,H,W] with samples / 255.
Tensor decode_pnm(const std::vector<std::uint8_t>& bytes);
// Canonical header "P6\n<w> <h>\n255\n". Samples are clamped to [0,1] and
// rounded half-up.
std::vector<std::uint8_t> encode_pnm(const Tensor& image);

Tensor read_image(const std::filesystem::path& path);
void write_image(const Tensor& image, const std::filesystem::path& path);

std::uint8_t quantize_sample(float v);
// What a tensor reads back as after write_image.
Tensor quantize(const Tensor& image);

// Bilinear resampling with half-pixel centres and clamped borders. Accepts
// [C,H,W] or [N,C,H,W].
Tensor resize_bilinear(const Tensor& image, std::int64_t height, std::int64_t width);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace domstyle
