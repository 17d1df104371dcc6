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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "smce/image.hpp"
#include "smce/network.hpp"

namespace smce {

enum class Split { train, test };

struct LabeledDataset {
  std::vector<ImageTensor> images;  // every image carries a label
  std::vector<std::string> class_names;
  Split split = Split::train;

  std::size_t size() const { return images.size(); }
  int num_classes() const { return static_cast<int>(class_names.size()); }
  Shape shape() const { return images.empty() ? Shape{} : images.front().shape; }
};

inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * 32 * 32;

// One CIFAR-10 binary batch: 3073-byte records of label + 1024 R + 1024 G +
// 1024 B bytes, pixels scaled by 1/255.
std::vector<ImageTensor> decode_cifar10_batch(std::span<const std::uint8_t> bytes);
std::vector<ImageTensor> load_cifar10_batch(const std::filesystem::path& file);

// Reads data_batch_1..5.bin (train) or test_batch.bin (test) from `directory`.
LabeledDataset load_cifar10(const std::filesystem::path& directory, Split split);

const std::array<std::string, 10>& cifar10_class_names();

/// Class-conditional shapes (one shape and colour per class) over a noisy
/// random background. Labels cycle 0..m-1, so every class gets exactly
/// `per_class` images. Deterministic in `seed`.
LabeledDataset synth_dataset(int num_classes, int per_class, int image_size, std::uint64_t seed,
                             Split split = Split::train);

// Per-channel mean and (population) standard deviation over every pixel.
Normalization channel_statistics(const LabeledDataset& data);

}  // namespace smce
