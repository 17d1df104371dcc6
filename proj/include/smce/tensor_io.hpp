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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "smce/image.hpp"

namespace smce {

// Raw tensor stack, little-endian:
//   "SMTS"  magic, u8 version (1)
//   u32 count, u32 channels, u32 height, u32 width
//   count * channels * height * width f32 values, image after image
// Labels are not stored here; manifests carry them.
std::vector<std::uint8_t> encode_tensors(std::span<const ImageTensor> images, Shape shape);
std::vector<ImageTensor> decode_tensors(std::span<const std::uint8_t> bytes);
void save_tensors(std::span<const ImageTensor> images, Shape shape,
                  const std::filesystem::path& path);
std::vector<ImageTensor> load_tensors(const std::filesystem::path& path);

// Binary PPM (P6, maxval 255) to a 3-channel image scaled by 1/255, and back
// (values rounded to the nearest byte).
ImageTensor read_ppm(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_ppm(const ImageTensor& image);

}  // namespace smce
