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

#include "smce/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bytes.hpp"
#include "smce/error.hpp"

namespace smce {

const std::array<std::string, 10>& cifar10_class_names() {
  static const std::array<std::string, 10> names{"airplane", "automobile", "bird",  "cat",  "deer",
                                                 "dog",      "frog",       "horse", "ship", "truck"};
  return names;
}

std::vector<ImageTensor> decode_cifar10_batch(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % kCifarRecordBytes != 0) {
    throw DataError("CIFAR-10 batch length " + std::to_string(bytes.size()) +
                    " is not a multiple of 3073");
  }
  const Shape shape{3, 32, 32};
  std::vector<ImageTensor> images;
  images.reserve(bytes.size() / kCifarRecordBytes);
  for (std::size_t off = 0; off < bytes.size(); off += kCifarRecordBytes) {
    const std::uint8_t label = bytes[off];
    if (label >= 10) {
      throw DataError("CIFAR-10 record " + std::to_string(off / kCifarRecordBytes) +
                      " has label byte " + std::to_string(label));
    }
    std::vector<float> pixels(shape.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      pixels[i] = static_cast<float>(bytes[off + 1 + i]) / 255.0f;
    }
    images.emplace_back(shape, std::move(pixels), static_cast<int>(label));
  }
  return images;
}

std::vector<ImageTensor> load_cifar10_batch(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) throw DataError("missing CIFAR-10 file " + file.string());
  return decode_cifar10_batch(detail::read_file(file));
}

LabeledDataset load_cifar10(const std::filesystem::path& directory, Split split) {
  LabeledDataset out;
  out.split = split;
  out.class_names.assign(cifar10_class_names().begin(), cifar10_class_names().end());
  std::vector<std::string> files;
  if (split == Split::train) {
    for (int i = 1; i <= 5; ++i) files.push_back("data_batch_" + std::to_string(i) + ".bin");
  } else {
    files.push_back("test_batch.bin");
  }
  for (const auto& name : files) {
    auto batch = load_cifar10_batch(directory / name);
    std::move(batch.begin(), batch.end(), std::back_inserter(out.images));
  }
  return out;
}

namespace {

struct Rgb {
  float r, g, b;
};

constexpr std::array<Rgb, 10> kPalette{{{0.95f, 0.20f, 0.20f},
                                        {0.20f, 0.85f, 0.25f},
                                        {0.25f, 0.35f, 0.95f},
                                        {0.95f, 0.90f, 0.20f},
                                        {0.90f, 0.30f, 0.90f},
                                        {0.20f, 0.90f, 0.90f},
                                        {0.95f, 0.60f, 0.15f},
                                        {0.95f, 0.95f, 0.95f},
                                        {0.55f, 0.35f, 0.15f},
                                        {0.60f, 0.90f, 0.50f}}};

// Whether (u, v) in the unit box [0,1)^2 belongs to shape `kind`.
bool inside(int kind, float u, float v) {
  const float du = u - 0.5f;
  const float dv = v - 0.5f;
  const float r2 = du * du + dv * dv;
  switch (kind) {
    case 0:  // filled square
      return true;
    case 1:  // disc
      return r2 <= 0.25f;
    case 2:  // horizontal bar
      return std::abs(dv) <= 0.17f;
    case 3:  // vertical bar
      return std::abs(du) <= 0.17f;
    case 4:  // plus
      return std::abs(du) <= 0.12f || std::abs(dv) <= 0.12f;
    case 5:  // diagonal cross
      return std::abs(du - dv) <= 0.12f || std::abs(du + dv) <= 0.12f;
    case 6:  // ring
      return r2 <= 0.25f && r2 >= 0.09f;
    case 7:  // triangle, apex at top
      return std::abs(du) <= 0.5f * v;
    case 8:  // hollow frame
      return std::max(std::abs(du), std::abs(dv)) >= 0.32f;
    default:  // checkerboard
      return ((static_cast<int>(u * 4.0f) + static_cast<int>(v * 4.0f)) & 1) == 0;
  }
}

}  // namespace

LabeledDataset synth_dataset(int num_classes, int per_class, int image_size, std::uint64_t seed,
                             Split split) {
  if (num_classes < 2) throw InputError("synth_dataset: at least two classes required");
  if (per_class < 0) throw InputError("synth_dataset: negative sample count");
  if (image_size < 8) throw InputError("synth_dataset: image size must be at least 8");

  LabeledDataset out;
  out.split = split;
  for (int c = 0; c < num_classes; ++c) out.class_names.push_back("synth" + std::to_string(c));

  const Shape shape{3, image_size, image_size};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::normal_distribution<float> noise(0.0f, 0.06f);

  const int total = num_classes * per_class;
  out.images.reserve(total);
  for (int i = 0; i < total; ++i) {
    const int label = i % num_classes;
    const int kind = label % 10;
    Rgb fg = kPalette[label % kPalette.size()];
    // Classes beyond ten reuse shapes with a darker colour.
    if (label >= 10) fg = {fg.r * 0.6f, fg.g * 0.6f, fg.b * 0.6f};
    const Rgb bg{0.25f * unit(rng), 0.25f * unit(rng), 0.25f * unit(rng)};
    const float extent = (0.45f + 0.3f * unit(rng)) * image_size;
    const float x0 = unit(rng) * (image_size - extent);
    const float y0 = unit(rng) * (image_size - extent);
    const float shade = 0.8f + 0.2f * unit(rng);

    ImageTensor img(shape);
    img.label = label;
    for (int y = 0; y < image_size; ++y) {
      for (int x = 0; x < image_size; ++x) {
        const float u = (x + 0.5f - x0) / extent;
        const float v = (y + 0.5f - y0) / extent;
        const bool on = u >= 0.0f && u < 1.0f && v >= 0.0f && v < 1.0f && inside(kind, u, v);
        const Rgb base = on ? Rgb{fg.r * shade, fg.g * shade, fg.b * shade} : bg;
        img.at(0, y, x) = std::clamp(base.r + noise(rng), 0.0f, 1.0f);
        img.at(1, y, x) = std::clamp(base.g + noise(rng), 0.0f, 1.0f);
        img.at(2, y, x) = std::clamp(base.b + noise(rng), 0.0f, 1.0f);
      }
    }
    out.images.push_back(std::move(img));
  }
  return out;
}

Normalization channel_statistics(const LabeledDataset& data) {
  if (data.images.empty()) throw InputError("channel_statistics: empty dataset");
  const Shape shape = data.shape();
  const std::size_t plane = static_cast<std::size_t>(shape.height) * shape.width;
  Normalization norm{std::vector<float>(shape.channels), std::vector<float>(shape.channels)};
  for (int c = 0; c < shape.channels; ++c) {
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& img : data.images) {
      for (std::size_t i = 0; i < plane; ++i) {
        const double v = img.data[c * plane + i];
        sum += v;
        sq += v * v;
      }
    }
    const double n = static_cast<double>(plane) * data.images.size();
    const double mean = sum / n;
    const double var = std::max(sq / n - mean * mean, 0.0);
    norm.mean[c] = static_cast<float>(mean);
    norm.stddev[c] = static_cast<float>(std::max(std::sqrt(var), 1e-3));
  }
  return norm;
}

}  // namespace smce
