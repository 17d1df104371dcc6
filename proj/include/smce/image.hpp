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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace smce {

struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// C x H x W image with raw pixels in [0,1], channel-major then row-major.
struct ImageTensor {
  Shape shape;
  std::vector<float> data;
  std::optional<int> label;

  ImageTensor() = default;
  explicit ImageTensor(Shape s, float fill = 0.0f)
      : shape(s), data(s.size(), fill) {}
  ImageTensor(Shape s, std::vector<float> values, std::optional<int> lbl = {});

  float& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * shape.height + y) * shape.width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * shape.height + y) * shape.width + x];
  }

  // True if every element lies in [0,1] and the buffer matches the shape.
  bool valid() const;
};

/// Softmax output of a classifier: nonnegative, sums to one.
struct ProbVector {
  std::vector<float> probs;

  std::size_t size() const { return probs.size(); }
  float operator[](std::size_t i) const { return probs[i]; }
  int argmax() const;
  bool valid(double tolerance = 1e-5) const;
};

ProbVector softmax(std::span<const float> logits);
int argmax(std::span<const float> values);

// Perturbation norms between two images of the same shape.
float linf_distance(const ImageTensor& a, const ImageTensor& b);
// Number of spatial positions (y, x) where any channel differs.
int l0_pixels(const ImageTensor& a, const ImageTensor& b);

}  // namespace smce
