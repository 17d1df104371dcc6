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

#include "smce/network.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "smce/error.hpp"
#include "smce/parallel.hpp"

namespace smce {

namespace {

std::size_t layer_parameter_count(const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::conv2d:
      return static_cast<std::size_t>(layer.out) * layer.in * layer.kernel * layer.kernel +
             static_cast<std::size_t>(layer.out);
    case LayerKind::linear:
      return static_cast<std::size_t>(layer.out) * layer.in + static_cast<std::size_t>(layer.out);
    default:
      return 0;
  }
}

std::size_t weight_count(const LayerSpec& layer) {
  return layer_parameter_count(layer) - static_cast<std::size_t>(layer.out);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find(sep, start);
    if (end == std::string_view::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::vector<int> parse_ints(const std::vector<std::string_view>& tokens, std::size_t first) {
  std::vector<int> values;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    int v = 0;
    const auto* begin = tokens[i].data();
    const auto* end = begin + tokens[i].size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
      throw InputError("architecture: bad integer '" + std::string(tokens[i]) + "'");
    }
    values.push_back(v);
  }
  return values;
}

// ---------------------------------------------------------------------------
// Layer kernels. All buffers are channel-major, row-major.

void conv_forward(const LayerSpec& l, Shape in, Shape out, std::span<const float> x,
                  std::span<const float> w, std::span<const float> b, std::span<float> y) {
  const int k = l.kernel;
  const int pad = l.padding;
  const std::size_t out_plane = static_cast<std::size_t>(out.height) * out.width;
  const std::size_t in_plane = static_cast<std::size_t>(in.height) * in.width;
  for (int oc = 0; oc < out.channels; ++oc) {
    float* dst = y.data() + oc * out_plane;
    std::fill(dst, dst + out_plane, b[oc]);
    for (int ic = 0; ic < in.channels; ++ic) {
      const float* src = x.data() + ic * in_plane;
      const float* kern = w.data() + (static_cast<std::size_t>(oc) * in.channels + ic) * k * k;
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const float weight = kern[ky * k + kx];
          const int ox_begin = std::max(0, pad - kx);
          const int ox_end = std::min(out.width, in.width + pad - kx);
          for (int oy = 0; oy < out.height; ++oy) {
            const int iy = oy + ky - pad;
            if (iy < 0 || iy >= in.height) continue;
            float* row = dst + static_cast<std::size_t>(oy) * out.width;
            const float* src_row = src + static_cast<std::size_t>(iy) * in.width;
            const int shift = kx - pad;
            for (int ox = ox_begin; ox < ox_end; ++ox) row[ox] += weight * src_row[ox + shift];
          }
        }
      }
    }
  }
}

// dx += W^T * dy; dw += dy (x) x; db += sum dy. `dw`/`db` may be empty.
void conv_backward(const LayerSpec& l, Shape in, Shape out, std::span<const float> x,
                   std::span<const float> w, std::span<const float> dy, std::span<float> dx,
                   std::span<float> dw, std::span<float> db) {
  const int k = l.kernel;
  const int pad = l.padding;
  const std::size_t out_plane = static_cast<std::size_t>(out.height) * out.width;
  const std::size_t in_plane = static_cast<std::size_t>(in.height) * in.width;
  const bool want_params = !dw.empty();
  for (int oc = 0; oc < out.channels; ++oc) {
    const float* grad = dy.data() + oc * out_plane;
    if (want_params) {
      double sum = 0.0;
      for (std::size_t i = 0; i < out_plane; ++i) sum += grad[i];
      db[oc] += static_cast<float>(sum);
    }
    for (int ic = 0; ic < in.channels; ++ic) {
      const float* src = x.data() + ic * in_plane;
      float* dsrc = dx.data() + ic * in_plane;
      const std::size_t kern_base = (static_cast<std::size_t>(oc) * in.channels + ic) * k * k;
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const float weight = w[kern_base + ky * k + kx];
          const int ox_begin = std::max(0, pad - kx);
          const int ox_end = std::min(out.width, in.width + pad - kx);
          float wgrad = 0.0f;
          for (int oy = 0; oy < out.height; ++oy) {
            const int iy = oy + ky - pad;
            if (iy < 0 || iy >= in.height) continue;
            const float* grow = grad + static_cast<std::size_t>(oy) * out.width;
            const std::size_t row_start = static_cast<std::size_t>(iy) * in.width;
            float* drow = dsrc + row_start;
            const float* srow = src + row_start;
            const int shift = kx - pad;
            for (int ox = ox_begin; ox < ox_end; ++ox) {
              drow[ox + shift] += weight * grow[ox];
              wgrad += grow[ox] * srow[ox + shift];
            }
          }
          if (want_params) dw[kern_base + ky * k + kx] += wgrad;
        }
      }
    }
  }
}

void linear_forward(const LayerSpec& l, std::span<const float> x, std::span<const float> w,
                    std::span<const float> b, std::span<float> y) {
  for (int o = 0; o < l.out; ++o) {
    const float* row = w.data() + static_cast<std::size_t>(o) * l.in;
    float acc = 0.0f;
    for (int i = 0; i < l.in; ++i) acc += row[i] * x[i];
    y[o] = acc + b[o];
  }
}

void linear_backward(const LayerSpec& l, std::span<const float> x, std::span<const float> w,
                     std::span<const float> dy, std::span<float> dx, std::span<float> dw,
                     std::span<float> db) {
  const bool want_params = !dw.empty();
  for (int o = 0; o < l.out; ++o) {
    const float g = dy[o];
    const float* row = w.data() + static_cast<std::size_t>(o) * l.in;
    for (int i = 0; i < l.in; ++i) dx[i] += row[i] * g;
    if (want_params) {
      float* drow = dw.data() + static_cast<std::size_t>(o) * l.in;
      for (int i = 0; i < l.in; ++i) drow[i] += g * x[i];
      db[o] += g;
    }
  }
}

void maxpool_forward(int size, Shape in, Shape out, std::span<const float> x, std::span<float> y,
                     std::span<int> argmax_index) {
  for (int c = 0; c < out.channels; ++c) {
    for (int oy = 0; oy < out.height; ++oy) {
      for (int ox = 0; ox < out.width; ++ox) {
        int best = -1;
        float best_value = 0.0f;
        for (int dy = 0; dy < size; ++dy) {
          for (int dx = 0; dx < size; ++dx) {
            const int idx = (c * in.height + oy * size + dy) * in.width + ox * size + dx;
            if (best < 0 || x[idx] > best_value) {
              best = idx;
              best_value = x[idx];
            }
          }
        }
        const int o = (c * out.height + oy) * out.width + ox;
        y[o] = best_value;
        argmax_index[o] = best;
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Architecture

std::vector<Shape> Architecture::activation_shapes() const {
  if (input.channels < 1 || input.height < 1 || input.width < 1) {
    throw InputError("architecture: input shape must be positive");
  }
  if (layers.empty() || layers.back().kind != LayerKind::softmax) {
    throw InputError("architecture: softmax must be the final layer");
  }
  std::vector<Shape> shapes{input};
  Shape cur = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    switch (l.kind) {
      case LayerKind::conv2d: {
        if (l.in != cur.channels || l.out < 1 || l.kernel < 1 || l.padding < 0) {
          throw InputError("architecture: conv layer " + std::to_string(i) +
                           " does not match its input");
        }
        cur = {l.out, cur.height + 2 * l.padding - l.kernel + 1,
               cur.width + 2 * l.padding - l.kernel + 1};
        if (cur.height < 1 || cur.width < 1) {
          throw InputError("architecture: conv layer " + std::to_string(i) + " collapses the map");
        }
        break;
      }
      case LayerKind::relu:
        break;
      case LayerKind::maxpool:
        if (l.kernel < 1 || cur.height < l.kernel || cur.width < l.kernel) {
          throw InputError("architecture: pooling layer " + std::to_string(i) + " too large");
        }
        cur = {cur.channels, cur.height / l.kernel, cur.width / l.kernel};
        break;
      case LayerKind::linear:
        if (static_cast<std::size_t>(l.in) != cur.size() || l.out < 1) {
          throw InputError("architecture: linear layer " + std::to_string(i) + " expects " +
                           std::to_string(l.in) + " inputs, gets " + std::to_string(cur.size()));
        }
        cur = {l.out, 1, 1};
        break;
      case LayerKind::softmax:
        if (i + 1 != layers.size()) {
          throw InputError("architecture: softmax must be the final layer");
        }
        if (cur.height != 1 || cur.width != 1) {
          throw InputError("architecture: softmax needs a flat score vector");
        }
        break;
    }
    shapes.push_back(cur);
  }
  if (cur.channels < 2) throw InputError("architecture: at least two classes required");
  return shapes;
}

int Architecture::num_classes() const { return activation_shapes().back().channels; }

std::size_t Architecture::parameter_count() const {
  std::size_t total = 0;
  for (const auto& l : layers) total += layer_parameter_count(l);
  return total;
}

std::string Architecture::encode() const {
  std::ostringstream out;
  out << "input " << input.channels << ' ' << input.height << ' ' << input.width;
  for (const auto& l : layers) {
    out << '|';
    switch (l.kind) {
      case LayerKind::conv2d:
        out << "conv " << l.in << ' ' << l.out << ' ' << l.kernel << ' ' << l.padding;
        break;
      case LayerKind::relu:
        out << "relu";
        break;
      case LayerKind::maxpool:
        out << "maxpool " << l.kernel;
        break;
      case LayerKind::linear:
        out << "linear " << l.in << ' ' << l.out;
        break;
      case LayerKind::softmax:
        out << "softmax";
        break;
    }
  }
  return out.str();
}

Architecture Architecture::decode(std::string_view text) {
  Architecture arch;
  const auto entries = split(text, '|');
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto tokens = split(entries[i], ' ');
    const std::string_view op = tokens.front();
    const auto args = parse_ints(tokens, 1);
    auto expect = [&](std::size_t n) {
      if (args.size() != n) {
        throw InputError("architecture: '" + std::string(op) + "' takes " + std::to_string(n) +
                         " arguments");
      }
    };
    if (i == 0) {
      if (op != "input") throw InputError("architecture: must start with 'input'");
      expect(3);
      arch.input = {args[0], args[1], args[2]};
      continue;
    }
    LayerSpec l;
    if (op == "conv") {
      expect(4);
      l = {LayerKind::conv2d, args[0], args[1], args[2], args[3]};
    } else if (op == "relu") {
      expect(0);
      l.kind = LayerKind::relu;
    } else if (op == "maxpool") {
      expect(1);
      l.kind = LayerKind::maxpool;
      l.kernel = args[0];
    } else if (op == "linear") {
      expect(2);
      l = {LayerKind::linear, args[0], args[1], 0, 0};
    } else if (op == "softmax") {
      expect(0);
      l.kind = LayerKind::softmax;
    } else {
      throw InputError("architecture: unknown layer '" + std::string(op) + "'");
    }
    arch.layers.push_back(l);
  }
  arch.activation_shapes();
  return arch;
}

namespace {

Architecture conv_stack(Shape input, int classes, int width, int blocks) {
  Architecture arch{input, {}};
  int channels = input.channels;
  Shape cur = input;
  for (int b = 0; b < blocks; ++b) {
    const int out = width << std::min(b, 2);
    arch.layers.push_back({LayerKind::conv2d, channels, out, 3, 1});
    arch.layers.push_back({LayerKind::relu});
    arch.layers.push_back({LayerKind::maxpool, 0, 0, 2, 0});
    channels = out;
    cur = {out, cur.height / 2, cur.width / 2};
  }
  arch.layers.push_back({LayerKind::linear, static_cast<int>(cur.size()), classes, 0, 0});
  arch.layers.push_back({LayerKind::softmax});
  arch.activation_shapes();
  return arch;
}

}  // namespace

Architecture small_cnn(Shape input, int classes, int width) {
  return conv_stack(input, classes, width, 2);
}

Architecture medium_cnn(Shape input, int classes, int width) {
  return conv_stack(input, classes, width, 4);
}

Architecture mlp(Shape input, int classes, int hidden) {
  Architecture arch{input,
                    {{LayerKind::linear, static_cast<int>(input.size()), hidden, 0, 0},
                     {LayerKind::relu},
                     {LayerKind::linear, hidden, classes, 0, 0},
                     {LayerKind::softmax}}};
  arch.activation_shapes();
  return arch;
}

Architecture architecture_by_name(std::string_view name, Shape input, int classes, int width) {
  if (name == "small") return small_cnn(input, classes, width);
  if (name == "medium") return medium_cnn(input, classes, width);
  if (name == "mlp") return mlp(input, classes, width);
  throw ConfigError("unknown architecture '" + std::string(name) +
                    "' (expected small, medium or mlp)");
}

Normalization Normalization::identity(int channels) {
  return {std::vector<float>(channels, 0.0f), std::vector<float>(channels, 1.0f)};
}

// ---------------------------------------------------------------------------
// Classifier

struct Classifier::Trace {
  // acts[k] is the input of layer k; the input of the softmax layer holds the
  // logits.
  std::vector<std::vector<float>> acts;
  std::vector<std::vector<int>> pool_index;
};

Classifier::Classifier(Architecture arch, Normalization norm)
    : arch_(std::move(arch)), norm_(std::move(norm)) {
  shapes_ = arch_.activation_shapes();
  classes_ = shapes_.back().channels;
  const auto channels = static_cast<std::size_t>(arch_.input.channels);
  if (norm_.mean.size() != channels || norm_.stddev.size() != channels) {
    throw InputError("normalization constants do not match the input channel count");
  }
  for (float s : norm_.stddev) {
    if (!(s > 0.0f)) throw InputError("normalization stddev must be positive");
  }
  std::size_t offset = 0;
  for (const auto& l : arch_.layers) {
    offsets_.push_back(offset);
    offset += layer_parameter_count(l);
  }
  params_.assign(offset, 0.0f);
}

Classifier Classifier::he_initialized(Architecture arch, Normalization norm, std::uint64_t seed) {
  Classifier model(std::move(arch), std::move(norm));
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < model.arch_.layers.size(); ++i) {
    const LayerSpec& l = model.arch_.layers[i];
    if (l.kind != LayerKind::conv2d && l.kind != LayerKind::linear) continue;
    const int fan_in = l.kind == LayerKind::conv2d ? l.in * l.kernel * l.kernel : l.in;
    std::normal_distribution<float> dist(0.0f, std::sqrt(2.0f / static_cast<float>(fan_in)));
    const std::size_t n = weight_count(l);
    for (std::size_t j = 0; j < n; ++j) model.params_[model.offsets_[i] + j] = dist(rng);
  }
  return model;
}

Classifier::LayerParams Classifier::layer_params(std::size_t layer) const {
  const LayerSpec& l = arch_.layers.at(layer);
  const std::size_t n = layer_parameter_count(l);
  if (n == 0) return {};
  const std::span<const float> all(params_.data() + offsets_[layer], n);
  const std::size_t nw = weight_count(l);
  return {all.first(nw), all.subspan(nw)};
}

std::string Classifier::fingerprint() const {
  const std::string desc = arch_.encode();
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(desc.data()), static_cast<uInt>(desc.size()));
  auto feed = [&](std::span<const float> values) {
    crc = crc32(crc, reinterpret_cast<const Bytef*>(values.data()),
                static_cast<uInt>(values.size_bytes()));
  };
  feed(norm_.mean);
  feed(norm_.stddev);
  feed(params_);
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

void Classifier::check_input(const ImageTensor& image) const {
  if (image.shape != arch_.input || image.data.size() != arch_.input.size()) {
    throw InputError("image shape " + std::to_string(image.shape.channels) + "x" +
                     std::to_string(image.shape.height) + "x" + std::to_string(image.shape.width) +
                     " does not match model input " + std::to_string(arch_.input.channels) + "x" +
                     std::to_string(arch_.input.height) + "x" + std::to_string(arch_.input.width));
  }
}

void Classifier::run(const ImageTensor& image, Trace& trace) const {
  check_input(image);
  const std::size_t depth = arch_.layers.size();
  trace.acts.resize(depth);
  trace.pool_index.resize(depth);

  auto& x0 = trace.acts[0];
  x0.resize(image.data.size());
  const std::size_t plane = static_cast<std::size_t>(arch_.input.height) * arch_.input.width;
  for (int c = 0; c < arch_.input.channels; ++c) {
    const float mean = norm_.mean[c];
    const float inv = 1.0f / norm_.stddev[c];
    for (std::size_t i = 0; i < plane; ++i) {
      x0[c * plane + i] = (image.data[c * plane + i] - mean) * inv;
    }
  }

  for (std::size_t k = 0; k + 1 < depth; ++k) {
    const LayerSpec& l = arch_.layers[k];
    const auto& x = trace.acts[k];
    auto& y = trace.acts[k + 1];
    y.assign(shapes_[k + 1].size(), 0.0f);
    const auto p = layer_params(k);
    switch (l.kind) {
      case LayerKind::conv2d:
        conv_forward(l, shapes_[k], shapes_[k + 1], x, p.weights, p.bias, y);
        break;
      case LayerKind::relu:
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] < 0.0f ? 0.0f : x[i];  // NaN passes through
        break;
      case LayerKind::maxpool:
        trace.pool_index[k].resize(y.size());
        maxpool_forward(l.kernel, shapes_[k], shapes_[k + 1], x, y, trace.pool_index[k]);
        break;
      case LayerKind::linear:
        linear_forward(l, x, p.weights, p.bias, y);
        break;
      case LayerKind::softmax:
        break;
    }
  }
}

std::vector<float> Classifier::backprop(const Trace& trace, std::span<const float> dlogits,
                                        std::span<float> param_grad) const {
  const std::size_t depth = arch_.layers.size();
  std::vector<float> grad(dlogits.begin(), dlogits.end());
  std::vector<float> next;
  for (std::size_t k = depth - 1; k-- > 0;) {
    const LayerSpec& l = arch_.layers[k];
    const auto& x = trace.acts[k];
    next.assign(x.size(), 0.0f);
    std::span<float> dw;
    std::span<float> db;
    if (!param_grad.empty() && layer_parameter_count(l) > 0) {
      const std::size_t nw = weight_count(l);
      dw = param_grad.subspan(offsets_[k], nw);
      db = param_grad.subspan(offsets_[k] + nw, static_cast<std::size_t>(l.out));
    }
    const auto p = layer_params(k);
    switch (l.kind) {
      case LayerKind::conv2d:
        conv_backward(l, shapes_[k], shapes_[k + 1], x, p.weights, grad, next, dw, db);
        break;
      case LayerKind::relu:
        for (std::size_t i = 0; i < x.size(); ++i) next[i] = x[i] > 0.0f ? grad[i] : 0.0f;
        break;
      case LayerKind::maxpool: {
        const auto& idx = trace.pool_index[k];
        for (std::size_t o = 0; o < idx.size(); ++o) next[idx[o]] += grad[o];
        break;
      }
      case LayerKind::linear:
        linear_backward(l, x, p.weights, grad, next, dw, db);
        break;
      case LayerKind::softmax:
        break;
    }
    grad.swap(next);
  }
  // Chain rule through z = (x - mean) / stddev.
  const std::size_t plane = static_cast<std::size_t>(arch_.input.height) * arch_.input.width;
  for (int c = 0; c < arch_.input.channels; ++c) {
    const float inv = 1.0f / norm_.stddev[c];
    for (std::size_t i = 0; i < plane; ++i) grad[c * plane + i] *= inv;
  }
  return grad;
}

std::vector<float> Classifier::logits(const ImageTensor& image) const {
  Trace trace;
  run(image, trace);
  return trace.acts.back();
}

ProbVector Classifier::predict(const ImageTensor& image) const { return softmax(logits(image)); }

int Classifier::predict_label(const ImageTensor& image) const { return argmax(logits(image)); }

std::vector<ProbVector> Classifier::forward(std::span<const ImageTensor> batch, int jobs) const {
  std::vector<ProbVector> out(batch.size());
  parallel_for(batch.size(), jobs, [&](std::size_t i) { out[i] = predict(batch[i]); });
  return out;
}

std::vector<float> Classifier::input_gradient(const ImageTensor& image, int target,
                                              Loss loss) const {
  if (target < 0 || target >= classes_) {
    throw InputError("target class " + std::to_string(target) + " outside [0, " +
                     std::to_string(classes_) + ")");
  }
  Trace trace;
  run(image, trace);
  std::vector<float> dlogits(classes_, 0.0f);
  if (loss == Loss::class_score) {
    dlogits[target] = 1.0f;
  } else {
    const ProbVector p = softmax(trace.acts.back());
    for (int j = 0; j < classes_; ++j) dlogits[j] = p[j] - (j == target ? 1.0f : 0.0f);
  }
  return backprop(trace, dlogits, {});
}

std::vector<std::vector<float>> Classifier::class_jacobian(const ImageTensor& image) const {
  Trace trace;
  run(image, trace);
  std::vector<std::vector<float>> rows;
  rows.reserve(classes_);
  std::vector<float> seed(classes_, 0.0f);
  for (int j = 0; j < classes_; ++j) {
    std::fill(seed.begin(), seed.end(), 0.0f);
    seed[j] = 1.0f;
    rows.push_back(backprop(trace, seed, {}));
  }
  return rows;
}

Classifier::SampleLoss Classifier::accumulate_parameter_gradient(const ImageTensor& image,
                                                                 int label,
                                                                 std::span<float> grad) const {
  if (label < 0 || label >= classes_) throw InputError("label outside the class range");
  if (grad.size() != params_.size()) throw InputError("gradient buffer size mismatch");
  Trace trace;
  run(image, trace);
  const ProbVector p = softmax(trace.acts.back());
  std::vector<float> dlogits(classes_);
  for (int j = 0; j < classes_; ++j) dlogits[j] = p[j] - (j == label ? 1.0f : 0.0f);
  backprop(trace, dlogits, grad);
  return {-std::log(std::max(static_cast<double>(p[label]), 1e-12)), p.argmax()};
}

}  // namespace smce
