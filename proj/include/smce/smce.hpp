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

#include <filesystem>
#include <string>
#include <vector>

#include "smce/image.hpp"
#include "smce/network.hpp"

namespace smce {

/// Occlusion window: a size x size block of constant `fill` slid with `stride`.
struct MaskSpec {
  int size = 7;
  int stride = 8;
  float fill = 0.0f;

  // Throws InputError unless 1 <= size <= min(height, width), stride >= 1
  // and fill in [0,1].
  void validate(int height, int width) const;
};

// Default stride: 8 for a 7x7 window on a 32x32 image (a 4x4 grid), otherwise
// the window size.
int default_stride(int mask_size, int height, int width);

struct WindowOrigin {
  int row = 0;
  int col = 0;
  friend bool operator==(const WindowOrigin&, const WindowOrigin&) = default;
};

/// Window origins in raster order (left to right, then top to bottom).
struct WindowGrid {
  std::vector<WindowOrigin> origins;
  int rows = 0;  // windows along the vertical axis
  int cols = 0;  // windows along the horizontal axis

  std::size_t count() const { return origins.size(); }
};

// Origins 0, stride, 2*stride, ... per axis. A window that would overrun is
// pulled back so its far edge meets the image edge; duplicates are dropped.
std::vector<int> axis_origins(int extent, int size, int stride);
WindowGrid window_grid(int height, int width, const MaskSpec& spec);

// Copy of `image` with the window filled on every channel.
ImageTensor occlude(const ImageTensor& image, WindowOrigin origin, const MaskSpec& spec);

// Shannon entropy in bits, probabilities floored at 1e-12 before the log and
// 0 log 0 taken as 0. Accumulated in double.
double confidence_entropy(const ProbVector& p);
double confidence_entropy(const ProbVector& p, int expected_classes);

struct SmceResult {
  std::vector<double> entropies;  // per window, raster order, bits
  double smce = 0.0;              // mean of `entropies`
  MaskSpec mask;
  WindowGrid grid;
  std::string model_id;
};

/// Mean confidence entropy of the classifier over every occluded copy of
/// `image`. The occluded copies are evaluated on up to `jobs` workers and
/// reassembled in grid order.
SmceResult compute_smce(const Classifier& model, const ImageTensor& image, const MaskSpec& spec,
                        int jobs = 1);

enum class Colormap { white_yellow_red_black };

/// Per-window entropies laid out on the window grid (row-major).
struct EntropyFieldMap {
  int rows = 0;
  int cols = 0;
  std::vector<double> cells;
  double max_entropy = 1.0;  // log2 m, the top of the colour scale
  Colormap colormap = Colormap::white_yellow_red_black;

  double at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c]; }
  double mean() const;
};

EntropyFieldMap mefm(const Classifier& model, const ImageTensor& image, const MaskSpec& spec,
                     int jobs = 1);
EntropyFieldMap to_field_map(const SmceResult& result, int num_classes);

struct Rgb8 {
  unsigned char r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

// Piecewise-linear: white at 0, yellow at 1/3, red at 2/3, black at 1 (of
// the normalised entropy). Components are rounded to the nearest integer.
Rgb8 colormap_lookup(double normalized);

// Binary P6 image, each cell drawn as a cell_pixels x cell_pixels block.
std::vector<unsigned char> render_mefm_ppm(const EntropyFieldMap& map, int cell_pixels);
void render_mefm(const EntropyFieldMap& map, const std::filesystem::path& path, int cell_pixels);
// Row-major raw entropies, six decimals, comma separated.
std::string mefm_csv(const EntropyFieldMap& map);

}  // namespace smce
