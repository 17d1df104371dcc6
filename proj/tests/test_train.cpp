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

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "smce/error.hpp"
#include "smce/train.hpp"

using namespace smce;

namespace {

// Three well separated Gaussian blobs rendered as 1x4x4 images.
LabeledDataset blobs(int per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.05f);
  const float centres[3] = {0.2f, 0.5f, 0.8f};
  LabeledDataset d;
  d.class_names = {"a", "b", "c"};
  for (int i = 0; i < 3 * per_class; ++i) {
    const int label = i % 3;
    ImageTensor img({1, 4, 4});
    for (int p = 0; p < 16; ++p) {
      const float base = p < 8 ? centres[label] : 1.0f - centres[label];
      img.data[p] = std::clamp(base + noise(rng), 0.0f, 1.0f);
    }
    img.label = label;
    d.images.push_back(std::move(img));
  }
  return d;
}

}  // namespace

TEST_CASE("mlp learns separable blobs") {
  const LabeledDataset train_set = blobs(100, 1);
  const LabeledDataset test_set = blobs(50, 2);
  Classifier model = Classifier::he_initialized(mlp({1, 4, 4}, 3, 16), channel_statistics(train_set), 3);
  TrainParams params;
  params.epochs = 10;
  params.learning_rate = 0.05f;
  const TrainResult result = train(std::move(model), train_set, test_set, params);
  CHECK(result.history.size() == 10);
  CHECK(accuracy(result.model, test_set) >= 99.0);
  CHECK(result.history.back().val_accuracy >= 99.0);
  CHECK(result.history.back().train_loss < result.history.front().train_loss);
}

TEST_CASE("small cnn separates two synthetic classes") {
  const LabeledDataset train_set = synth_dataset(2, 200, 16, 3, Split::train);
  const LabeledDataset test_set = synth_dataset(2, 50, 16, 4, Split::test);
  Classifier model = Classifier::he_initialized(small_cnn({3, 16, 16}, 2, 4),
                                                channel_statistics(train_set), 5);
  TrainParams params;
  params.epochs = 5;
  const TrainResult result = train(std::move(model), train_set, test_set, params);
  CHECK(accuracy(result.model, test_set) >= 95.0);
}

TEST_CASE("zero learning rate leaves the weights untouched") {
  const LabeledDataset data = blobs(10, 7);
  const Classifier model = Classifier::he_initialized(mlp({1, 4, 4}, 3, 8), Normalization::identity(1), 1);
  TrainParams params;
  params.epochs = 2;
  params.learning_rate = 0.0f;
  const TrainResult result = train(model, data, {}, params);
  CHECK(std::equal(model.parameters().begin(), model.parameters().end(),
                   result.model.parameters().begin()));
}

TEST_CASE("training is bit-identical for a fixed seed") {
  const LabeledDataset data = blobs(20, 9);
  const Classifier model = Classifier::he_initialized(mlp({1, 4, 4}, 3, 8), Normalization::identity(1), 1);
  TrainParams params;
  params.epochs = 3;
  params.seed = 17;
  const TrainResult a = train(model, data, {}, params);
  const TrainResult b = train(model, data, {}, params);
  CHECK(a.model.fingerprint() == b.model.fingerprint());
  params.seed = 18;
  CHECK(train(model, data, {}, params).model.fingerprint() != a.model.fingerprint());
}

TEST_CASE("callback can stop training early") {
  const LabeledDataset data = blobs(10, 9);
  const Classifier model = Classifier::he_initialized(mlp({1, 4, 4}, 3, 8), Normalization::identity(1), 1);
  TrainParams params;
  params.epochs = 5;
  int calls = 0;
  const TrainResult r = train(model, data, {}, params, [&](const EpochStats& s, const Classifier&) {
    ++calls;
    return s.epoch < 2;
  });
  CHECK(calls == 2);
  CHECK(r.history.size() == 2);
}

TEST_CASE("non-finite parameters raise a numeric error") {
  const LabeledDataset data = blobs(5, 1);
  Classifier model = Classifier::he_initialized(mlp({1, 4, 4}, 3, 8), Normalization::identity(1), 1);
  model.parameters()[0] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(train(model, data, {}, TrainParams{}), NumericError);
}

TEST_CASE("empty or unlabelled training data is rejected") {
  const Classifier model = Classifier::he_initialized(mlp({1, 4, 4}, 3, 8), Normalization::identity(1), 1);
  CHECK_THROWS_AS(train(model, LabeledDataset{}, {}, TrainParams{}), InputError);
  LabeledDataset d = blobs(2, 1);
  d.images[3].label.reset();
  CHECK_THROWS_AS(train(model, d, {}, TrainParams{}), InputError);
}
