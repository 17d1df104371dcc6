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

#include "smce/image.hpp"

#include <algorithm>
#include <cmath>

#include "smce/error.hpp"

namespace smce {

ImageTensor::ImageTensor(Shape s, std::vector<float> values, std::optional<int> lbl)
    : shape(s), data(std::move(values)), label(lbl) {
  if (data.size() != shape.size()) {
    throw InputError("image buffer has " + std::to_string(data.size()) +
                     " elements, shape needs " + std::to_string(shape.size()));
  }
}

bool ImageTensor::valid() const {
  if (data.size() != shape.size()) return false;
  return std::all_of(data.begin(), data.end(),
                     [](float v) { return v >= 0.0f && v <= 1.0f; });
}

int ProbVector::argmax() const { return smce::argmax(probs); }

bool ProbVector::valid(double tolerance) const {
  double sum = 0.0;
  for (float p : probs) {
    if (!(p >= 0.0f && p <= 1.0f)) return false;
    sum += p;
  }
  return !probs.empty() && std::abs(sum - 1.0) <= tolerance;
}

ProbVector softmax(std::span<const float> logits) {
  ProbVector out;
  out.probs.resize(logits.size());
  if (logits.empty()) return out;
  const float peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double e = std::exp(static_cast<double>(logits[i]) - peak);
    out.probs[i] = static_cast<float>(e);
    sum += e;
  }
  for (float& p : out.probs) p = static_cast<float>(p / sum);
  return out;
}

int argmax(std::span<const float> values) {
  if (values.empty()) return -1;
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

float linf_distance(const ImageTensor& a, const ImageTensor& b) {
  if (a.shape != b.shape) throw InputError("linf_distance: shape mismatch");
  float worst = 0.0f;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
  }
  return worst;
}

int l0_pixels(const ImageTensor& a, const ImageTensor& b) {
  if (a.shape != b.shape) throw InputError("l0_pixels: shape mismatch");
  int count = 0;
  for (int y = 0; y < a.shape.height; ++y) {
    for (int x = 0; x < a.shape.width; ++x) {
      for (int c = 0; c < a.shape.channels; ++c) {
        if (a.at(c, y, x) != b.at(c, y, x)) {
          ++count;
          break;
        }
      }
    }
  }
  return count;
}

}  // namespace smce
