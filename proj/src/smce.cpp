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

#include "smce/smce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "bytes.hpp"
#include "smce/error.hpp"

namespace smce {

void MaskSpec::validate(int height, int width) const {
  if (size < 1 || size > std::min(height, width)) {
    throw InputError("mask size " + std::to_string(size) + " must lie in [1, " +
                     std::to_string(std::min(height, width)) + "]");
  }
  if (stride < 1) throw InputError("mask stride must be at least 1");
  if (!(fill >= 0.0f && fill <= 1.0f)) throw InputError("mask fill must lie in [0,1]");
}

int default_stride(int mask_size, int height, int width) {
  if (mask_size == 7 && height == 32 && width == 32) return 8;
  return mask_size;
}

std::vector<int> axis_origins(int extent, int size, int stride) {
  std::vector<int> origins;
  for (int o = 0; o < extent; o += stride) {
    const int clamped = std::min(o, extent - size);
    if (origins.empty() || origins.back() != clamped) origins.push_back(clamped);
    if (clamped != o) break;
  }
  return origins;
}

WindowGrid window_grid(int height, int width, const MaskSpec& spec) {
  spec.validate(height, width);
  const auto rows = axis_origins(height, spec.size, spec.stride);
  const auto cols = axis_origins(width, spec.size, spec.stride);
  WindowGrid grid;
  grid.rows = static_cast<int>(rows.size());
  grid.cols = static_cast<int>(cols.size());
  grid.origins.reserve(rows.size() * cols.size());
  for (int r : rows) {
    for (int c : cols) grid.origins.push_back({r, c});
  }
  return grid;
}

ImageTensor occlude(const ImageTensor& image, WindowOrigin origin, const MaskSpec& spec) {
  const Shape& s = image.shape;
  if (origin.row < 0 || origin.col < 0 || origin.row + spec.size > s.height ||
      origin.col + spec.size > s.width || spec.size < 1) {
    throw InputError("occlusion window at (" + std::to_string(origin.row) + ", " +
                     std::to_string(origin.col) + ") size " + std::to_string(spec.size) +
                     " lies outside the image");
  }
  ImageTensor out = image;
  for (int c = 0; c < s.channels; ++c) {
    for (int y = origin.row; y < origin.row + spec.size; ++y) {
      for (int x = origin.col; x < origin.col + spec.size; ++x) out.at(c, y, x) = spec.fill;
    }
  }
  return out;
}

double confidence_entropy(const ProbVector& p) {
  // Renormalise in double so f32 rounding in the softmax cannot lift a
  // uniform vector above log2 m.
  double total = 0.0;
  for (float raw : p.probs) total += std::max(raw, 0.0f);
  if (!(total > 0.0)) throw InputError("confidence_entropy: probabilities sum to zero");
  double h = 0.0;
  for (float raw : p.probs) {
    if (raw <= 0.0f) continue;
    const double q = std::max(static_cast<double>(raw) / total, 1e-12);
    h -= q * std::log2(q);
  }
  // Rounding can push a near-one-hot vector a hair below zero.
  return std::max(h, 0.0);
}

double confidence_entropy(const ProbVector& p, int expected_classes) {
  if (static_cast<int>(p.size()) != expected_classes) {
    throw InputError("probability vector has " + std::to_string(p.size()) +
                     " entries, classifier has " + std::to_string(expected_classes) + " classes");
  }
  return confidence_entropy(p);
}

SmceResult compute_smce(const Classifier& model, const ImageTensor& image, const MaskSpec& spec,
                        int jobs) {
  if (image.shape != model.input_shape()) {
    throw InputError("compute_smce: image shape does not match the model input");
  }
  SmceResult result;
  result.mask = spec;
  result.grid = window_grid(image.shape.height, image.shape.width, spec);
  result.model_id = model.fingerprint();

  std::vector<ImageTensor> occluded;
  occluded.reserve(result.grid.count());
  for (const auto& origin : result.grid.origins) occluded.push_back(occlude(image, origin, spec));
  const auto probs = model.forward(occluded, jobs);

  result.entropies.reserve(probs.size());
  for (const auto& p : probs) {
    result.entropies.push_back(confidence_entropy(p, model.num_classes()));
  }
  result.smce = std::accumulate(result.entropies.begin(), result.entropies.end(), 0.0) /
                static_cast<double>(result.entropies.size());
  return result;
}

double EntropyFieldMap::mean() const {
  if (cells.empty()) return 0.0;
  return std::accumulate(cells.begin(), cells.end(), 0.0) / static_cast<double>(cells.size());
}

EntropyFieldMap to_field_map(const SmceResult& result, int num_classes) {
  EntropyFieldMap map;
  map.rows = result.grid.rows;
  map.cols = result.grid.cols;
  map.cells = result.entropies;
  map.max_entropy = std::log2(static_cast<double>(num_classes));
  return map;
}

EntropyFieldMap mefm(const Classifier& model, const ImageTensor& image, const MaskSpec& spec,
                     int jobs) {
  return to_field_map(compute_smce(model, image, spec, jobs), model.num_classes());
}

Rgb8 colormap_lookup(double normalized) {
  struct Stop {
    double r, g, b;
  };
  static constexpr Stop stops[4] = {{255, 255, 255}, {255, 255, 0}, {255, 0, 0}, {0, 0, 0}};
  const double t = std::clamp(std::isfinite(normalized) ? normalized : 0.0, 0.0, 1.0) * 3.0;
  const int seg = std::min(static_cast<int>(t), 2);
  const double f = t - seg;
  const Stop& a = stops[seg];
  const Stop& b = stops[seg + 1];
  auto mix = [f](double x, double y) {
    return static_cast<unsigned char>(std::lround(x + (y - x) * f));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

std::vector<unsigned char> render_mefm_ppm(const EntropyFieldMap& map, int cell_pixels) {
  if (map.rows < 1 || map.cols < 1 ||
      map.cells.size() != static_cast<std::size_t>(map.rows) * map.cols) {
    throw InputError("render_mefm: map dimensions do not match its cells");
  }
  if (cell_pixels < 1) throw InputError("render_mefm: cell size must be positive");
  const int width = map.cols * cell_pixels;
  const int height = map.rows * cell_pixels;
  const std::string header =
      "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + static_cast<std::size_t>(width) * height * 3);
  const double scale = map.max_entropy > 0.0 ? 1.0 / map.max_entropy : 0.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Rgb8 c = colormap_lookup(map.at(y / cell_pixels, x / cell_pixels) * scale);
      out.push_back(c.r);
      out.push_back(c.g);
      out.push_back(c.b);
    }
  }
  return out;
}

void render_mefm(const EntropyFieldMap& map, const std::filesystem::path& path, int cell_pixels) {
  const auto bytes = render_mefm_ppm(map, cell_pixels);
  detail::write_file(path, {reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
}

std::string mefm_csv(const EntropyFieldMap& map) {
  std::string out;
  char buf[32];
  for (int r = 0; r < map.rows; ++r) {
    for (int c = 0; c < map.cols; ++c) {
      std::snprintf(buf, sizeof buf, "%.6f", map.at(r, c));
      if (c > 0) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace smce
