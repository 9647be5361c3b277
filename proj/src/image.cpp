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

#include "domstyle/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "domstyle/error.hpp"

namespace domstyle {
namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n' && bytes[pos] != '\r') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
    token.push_back(static_cast<char>(bytes[pos++]));
  }
  check(!token.empty(), ErrorCode::kTruncatedPayload, "image header ends early");
  return token;
}

std::int64_t header_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos,
                        const char* field) {
  const std::string token = header_token(bytes, pos);
  check(std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
            token.size() <= 9,
        ErrorCode::kUnsupportedFormat, std::string("image header: bad ") + field + " '" + token + "'");
  return std::stoll(token);
}

}  // namespace

Tensor decode_pnm(const std::vector<std::uint8_t>& bytes) {
  check(bytes.size() >= 2, ErrorCode::kTruncatedPayload, "image file is too short");
  check(bytes[0] == 'P', ErrorCode::kMagicMismatch, "not a PNM image (missing 'P' magic)");
  std::int64_t channels = 0;
  if (bytes[1] == '5') {
    channels = 1;
  } else if (bytes[1] == '6') {
    channels = 3;
  } else {
    fail(ErrorCode::kUnsupportedFormat,
         std::string("unsupported image type 'P") + static_cast<char>(bytes[1]) +
             "' (binary P5 or P6 only)");
  }
  std::size_t pos = 2;
  check(pos < bytes.size() && (std::isspace(bytes[pos]) || bytes[pos] == '#'),
        ErrorCode::kUnsupportedFormat, "image magic must be followed by whitespace");
  const std::int64_t width = header_int(bytes, pos, "width");
  const std::int64_t height = header_int(bytes, pos, "height");
  const std::int64_t maxval = header_int(bytes, pos, "maxval");
  check(width > 0 && height > 0, ErrorCode::kUnsupportedFormat, "image extents must be positive");
  check(maxval == 255, ErrorCode::kUnsupportedFormat,
        "image maxval must be 255, got " + std::to_string(maxval));
  check(pos < bytes.size() && std::isspace(bytes[pos]), ErrorCode::kTruncatedPayload,
        "image header is not terminated");
  ++pos;
  const std::int64_t plane = width * height;
  const auto need = static_cast<std::size_t>(plane * channels);
  check(bytes.size() - pos >= need, ErrorCode::kTruncatedPayload,
        "image pixel data truncated: need " + std::to_string(need) + " bytes, have " +
            std::to_string(bytes.size() - pos));
  Tensor out(Shape{channels, height, width});
  auto d = out.mutable_data();
  for (std::int64_t i = 0; i < plane; ++i) {
    for (std::int64_t c = 0; c < channels; ++c) {
      d[static_cast<std::size_t>(c * plane + i)] =
          static_cast<float>(bytes[pos + static_cast<std::size_t>(i * channels + c)]) / 255.0f;
    }
  }
  return out;
}

std::uint8_t quantize_sample(float v) {
  const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(clamped * 255.0 + 0.5));
}

std::vector<std::uint8_t> encode_pnm(const Tensor& image) {
  Tensor x = image;
  if (x.rank() == 4) {
    check(x.dim(0) == 1, ErrorCode::kShapeMismatch, "encode_pnm takes a single image");
    x = Tensor(Shape{x.dim(1), x.dim(2), x.dim(3)},
               std::vector<float>(x.data().begin(), x.data().end()));
  }
  check(x.rank() == 3 && (x.dim(0) == 1 || x.dim(0) == 3), ErrorCode::kShapeMismatch,
        "encode_pnm expects [1|3,H,W], got " + shape_to_string(image.shape()));
  const std::int64_t channels = x.dim(0), height = x.dim(1), width = x.dim(2);
  const std::string header = std::string(channels == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const std::int64_t plane = width * height;
  out.reserve(out.size() + static_cast<std::size_t>(plane * channels));
  const auto d = x.data();
  for (std::int64_t i = 0; i < plane; ++i) {
    for (std::int64_t c = 0; c < channels; ++c) {
      out.push_back(quantize_sample(d[static_cast<std::size_t>(c * plane + i)]));
    }
  }
  return out;
}

Tensor quantize(const Tensor& image) {
  std::vector<float> v(image.data().size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<float>(quantize_sample(image.data()[i])) / 255.0f;
  }
  return Tensor(image.shape(), std::move(v));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  check(static_cast<bool>(out), ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  check(static_cast<bool>(out), ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

Tensor read_image(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  try {
    return decode_pnm(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_image(const Tensor& image, const std::filesystem::path& path) {
  write_file(path, encode_pnm(image));
}

Tensor resize_bilinear(const Tensor& image, std::int64_t height, std::int64_t width) {
  check(height >= 1 && width >= 1, ErrorCode::kInvalidArgument, "resize target must be positive");
  check(image.rank() == 3 || image.rank() == 4, ErrorCode::kShapeMismatch,
        "resize expects [C,H,W] or [N,C,H,W]");
  const std::int64_t h = image.dim(image.rank() - 2), w = image.dim(image.rank() - 1);
  const std::int64_t planes = image.numel() / (h * w);
  Shape shape = image.shape();
  shape[shape.size() - 2] = height;
  shape[shape.size() - 1] = width;
  if (h == height && w == width) return image.detach();
  Tensor out(shape);
  auto od = out.mutable_data();
  const auto src = image.data();
  auto axis = [](std::int64_t i, std::int64_t n_in, std::int64_t n_out, std::int64_t& lo,
                 std::int64_t& hi, double& t) {
    double s = (static_cast<double>(i) + 0.5) * static_cast<double>(n_in) /
                   static_cast<double>(n_out) - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(n_in - 1));
    lo = static_cast<std::int64_t>(std::floor(s));
    hi = std::min(lo + 1, n_in - 1);
    t = s - static_cast<double>(lo);
  };
  for (std::int64_t y = 0; y < height; ++y) {
    std::int64_t y0, y1;
    double ty;
    axis(y, h, height, y0, y1, ty);
    for (std::int64_t x = 0; x < width; ++x) {
      std::int64_t x0, x1;
      double tx;
      axis(x, w, width, x0, x1, tx);
      for (std::int64_t p = 0; p < planes; ++p) {
        const float* s = src.data() + p * h * w;
        const double top = (1.0 - tx) * s[y0 * w + x0] + tx * s[y0 * w + x1];
        const double bottom = (1.0 - tx) * s[y1 * w + x0] + tx * s[y1 * w + x1];
        od[static_cast<std::size_t>(p * height * width + y * width + x)] =
            static_cast<float>((1.0 - ty) * top + ty * bottom);
      }
    }
  }
  return out;
}

}  // namespace domstyle
