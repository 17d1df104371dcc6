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
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smce/image.hpp"

namespace smce {

enum class LayerKind { conv2d, relu, maxpool, linear, softmax };

// One layer of the fixed CNN family. Convolutions are square, stride 1, with
// symmetric zero padding; max pooling is square with stride equal to its size.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  int in = 0;       // input channels (conv) or features (linear)
  int out = 0;      // output channels (conv) or features (linear)
  int kernel = 0;   // conv kernel edge, or pooling window edge
  int padding = 0;  // conv only

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Layer list plus input geometry. The textual encoding is what a checkpoint
/// stores, e.g. "input 3 32 32|conv 3 16 3 1|relu|maxpool 2|linear 4096 10|softmax".
struct Architecture {
  Shape input;
  std::vector<LayerSpec> layers;

  // Shape entering each layer, plus the final output shape. Throws
  // InputError if consecutive layers do not compose or softmax is not last.
  std::vector<Shape> activation_shapes() const;
  int num_classes() const;
  std::size_t parameter_count() const;

  std::string encode() const;
  static Architecture decode(std::string_view text);

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// Built-in desk-scale configurations. "small" has two conv blocks, "medium"
// four; "mlp" is a one-hidden-layer perceptron for quick checks.
Architecture small_cnn(Shape input, int classes, int width = 16);
Architecture medium_cnn(Shape input, int classes, int width = 16);
Architecture mlp(Shape input, int classes, int hidden = 32);
Architecture architecture_by_name(std::string_view name, Shape input, int classes, int width);

/// Per-channel constants applied inside the model: z = (x - mean) / stddev.
struct Normalization {
  std::vector<float> mean;
  std::vector<float> stddev;

  static Normalization identity(int channels);
  friend bool operator==(const Normalization&, const Normalization&) = default;
};

enum class Loss { cross_entropy, class_score };

/// Feed-forward classifier over raw [0,1] images. Immutable after training;
/// every const member is safe to call from many threads at once.
class Classifier {
 public:
  // All parameters zero: the logits are equal for every input.
  Classifier(Architecture arch, Normalization norm);

  static Classifier he_initialized(Architecture arch, Normalization norm, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }
  const Normalization& normalization() const { return norm_; }
  Shape input_shape() const { return arch_.input; }
  int num_classes() const { return classes_; }

  std::span<const float> parameters() const { return params_; }
  std::span<float> parameters() { return params_; }

  struct LayerParams {
    std::span<const float> weights;
    std::span<const float> bias;
  };
  LayerParams layer_params(std::size_t layer) const;

  // CRC32 of the architecture encoding and parameter bytes, as 8 hex digits.
  std::string fingerprint() const;

  std::vector<float> logits(const ImageTensor& image) const;
  ProbVector predict(const ImageTensor& image) const;
  int predict_label(const ImageTensor& image) const;

  // Order-stable batch inference; `jobs` bounds the worker count.
  std::vector<ProbVector> forward(std::span<const ImageTensor> batch, int jobs = 1) const;

  // d loss / d pixel in raw-pixel space. Cross-entropy is taken against
  // `target`; class-score differentiates the target's logit.
  std::vector<float> input_gradient(const ImageTensor& image, int target, Loss loss) const;

  // One raw-pixel gradient of each class logit, from a single forward pass.
  std::vector<std::vector<float>> class_jacobian(const ImageTensor& image) const;

  struct SampleLoss {
    double loss = 0.0;  // cross-entropy, nats
    int predicted = -1;
  };
  // Adds d CE / d params for one labelled sample into `grad`.
  SampleLoss accumulate_parameter_gradient(const ImageTensor& image, int label,
                                           std::span<float> grad) const;

 private:
  struct Trace;

  void check_input(const ImageTensor& image) const;
  void run(const ImageTensor& image, Trace& trace) const;
  // Backpropagates `dlogits` through the trace. Returns the gradient in raw
  // pixel space; parameter gradients are accumulated into `param_grad` when
  // it is non-empty.
  std::vector<float> backprop(const Trace& trace, std::span<const float> dlogits,
                              std::span<float> param_grad) const;

  Architecture arch_;
  Normalization norm_;
  std::vector<Shape> shapes_;
  std::vector<std::size_t> offsets_;  // parameter offset per layer
  std::vector<float> params_;
  int classes_ = 0;
};

}  // namespace smce
