/*
 *  Copyright 2026 The smce-detect Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#include "smce/tensor_io.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "bytes.hpp"
#include "smce/error.hpp"

namespace smce {

std::vector<std::uint8_t> encode_tensors(std::span<const ImageTensor> images, Shape shape) {
  detail::ByteWriter w;
  w.raw("SMTS");
  w.u8(1);
  w.u32(static_cast<std::uint32_t>(images.size()));
  w.u32(static_cast<std::uint32_t>(shape.channels));
  w.u32(static_cast<std::uint32_t>(shape.height));
  w.u32(static_cast<std::uint32_t>(shape.width));
  for (const auto& img : images) {
    if (img.shape != shape) throw InputError("encode_tensors: mixed image shapes");
    w.f32s(img.data);
  }
  return std::move(w.bytes());
}

std::vector<ImageTensor> decode_tensors(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "tensor file");
  if (r.raw(4) != "SMTS") throw DataError("tensor file: bad magic");
  if (r.u8() != 1) throw DataError("tensor file: unsupported version");
  const std::uint32_t count = r.u32();
  Shape shape;
  shape.channels = static_cast<int>(r.u32());
  shape.height = static_cast<int>(r.u32());
  shape.width = static_cast<int>(r.u32());
  if (r.remaining() != static_cast<std::size_t>(count) * shape.size() * 4) {
    throw DataError("tensor file: payload length does not match the header");
  }
  std::vector<ImageTensor> images;
  images.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    ImageTensor img(shape);
    r.f32s(img.data);
    images.push_back(std::move(img));
  }
  return images;
}

void save_tensors(std::span<const ImageTensor> images, Shape shape,
                  const std::filesystem::path& path) {
  detail::write_file(path, encode_tensors(images, shape));
}

std::vector<ImageTensor> load_tensors(const std::filesystem::path& path) {
  return decode_tensors(detail::read_file(path));
}

ImageTensor read_ppm(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok += static_cast<char>(bytes[pos++]);
    return tok;
  };
  if (next_token() != "P6") throw DataError(path.string() + ": not a binary PPM (P6)");
  int width = 0;
  int height = 0;
  int maxval = 0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw DataError(path.string() + ": malformed PPM header");
  }
  if (width < 1 || height < 1 || maxval != 255) {
    throw DataError(path.string() + ": only 8-bit PPM images are supported");
  }
  ++pos;  // single whitespace before the raster
  const Shape shape{3, height, width};
  if (bytes.size() - std::min(pos, bytes.size()) < shape.size()) {
    throw DataError(path.string() + ": PPM raster truncated");
  }
  ImageTensor img(shape);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = static_cast<float>(bytes[pos++]) / 255.0f;
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_ppm(const ImageTensor& image) {
  if (image.shape.channels != 3) throw InputError("encode_ppm: image must have 3 channels");
  const std::string header = "P6\n" + std::to_string(image.shape.width) + " " +
                             std::to_string(image.shape.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (int y = 0; y < image.shape.height; ++y) {
    for (int x = 0; x < image.shape.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.push_back(static_cast<std::uint8_t>(std::lround(image.at(c, y, x) * 255.0f)));
      }
    }
  }
  return out;
}

}  // namespace smce
