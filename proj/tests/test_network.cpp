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
#include <random>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "smce/error.hpp"
#include "smce/network.hpp"

using namespace smce;

namespace {

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_CASE("architecture encoding round-trips") {
  const Architecture small = small_cnn({3, 32, 32}, 10, 16);
  CHECK(small.encode().rfind("input 3 32 32|conv 3 16 3 1|relu|maxpool 2|", 0) == 0);
  CHECK(Architecture::decode(small.encode()) == small);
  const Architecture medium = medium_cnn({3, 32, 32}, 10, 8);
  CHECK(Architecture::decode(medium.encode()) == medium);
  const Architecture tiny = Architecture::decode("input 1 2 2|linear 4 2|softmax");
  CHECK(tiny.num_classes() == 2);
  CHECK(tiny.parameter_count() == 10);
  CHECK_THROWS_AS(Architecture::decode("input 3 32 32|frobnicate|softmax"), InputError);
  CHECK_THROWS_AS(Architecture::decode("input 1 2 2|linear 5 2|softmax"), InputError);
  CHECK_THROWS_AS(architecture_by_name("resnet", {3, 32, 32}, 10, 16), ConfigError);
}

TEST_CASE("forward pass matches the loop oracle on random inputs") {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Classifier model = oracle::random_small_net(seed);
    for (int n = 0; n < 30; ++n) {
      const ImageTensor img = oracle::random_image(model.input_shape(), rng);
      const auto want = oracle::logits(model, img);
      const auto got = model.logits(img);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-5));
      ++checked;
    }
  }
  CHECK(checked >= 100);
}

TEST_CASE("medium network and mlp also match the oracle") {
  std::mt19937_64 rng(5);
  const Shape s{3, 16, 16};
  for (const Architecture& arch : {medium_cnn(s, 5, 4), mlp(s, 5, 12)}) {
    const Classifier model = Classifier::he_initialized(arch, oracle::random_normalization(3, rng), 3);
    const ImageTensor img = oracle::random_image(s, rng);
    const auto want = oracle::logits(model, img);
    const auto got = model.logits(img);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-5));
  }
}

TEST_CASE("softmax output is a distribution and agrees with the logits") {
  std::mt19937_64 rng(2);
  const Classifier model = oracle::random_small_net(9);
  for (int n = 0; n < 20; ++n) {
    const ImageTensor img = oracle::random_image(model.input_shape(), rng);
    const ProbVector p = model.predict(img);
    CHECK(p.valid());
    const auto logits = model.logits(img);
    const ProbVector q = softmax(logits);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-6));
    CHECK(model.predict_label(img) == argmax(logits));
  }
}

TEST_CASE("zero-parameter model is uniform") {
  const Classifier model(small_cnn({3, 8, 8}, 4, 4), Normalization::identity(3));
  std::mt19937_64 rng(1);
  const ProbVector p = model.predict(oracle::random_image({3, 8, 8}, rng));
  for (float v : p.probs) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("input gradients match central differences on five seeded nets") {
  std::mt19937_64 rng(99);
  for (std::uint64_t seed = 21; seed < 26; ++seed) {
    const Classifier model = oracle::random_small_net(seed, {3, 6, 6}, 3, 3);
    const ImageTensor img = oracle::random_image(model.input_shape(), rng);
    for (Loss loss : {Loss::cross_entropy, Loss::class_score}) {
      const int target = static_cast<int>(seed % 3);
      const auto analytic = model.input_gradient(img, target, loss);
      const auto numeric =
          oracle::finite_difference_gradient(model, img, target, loss == Loss::class_score, 1e-6);
      for (std::size_t i = 0; i < numeric.size(); ++i) {
        if (std::abs(numeric[i]) > 1e-4) CHECK(relative_error(analytic[i], numeric[i]) < 1e-3);
      }
    }
  }
}

TEST_CASE("class jacobian rows equal per-class logit gradients") {
  std::mt19937_64 rng(4);
  const Classifier model = oracle::random_small_net(31);
  const ImageTensor img = oracle::random_image(model.input_shape(), rng);
  const auto jac = model.class_jacobian(img);
  REQUIRE(jac.size() == static_cast<std::size_t>(model.num_classes()));
  for (int k = 0; k < model.num_classes(); ++k) {
    const auto row = model.input_gradient(img, k, Loss::class_score);
    for (std::size_t i = 0; i < row.size(); ++i) CHECK(jac[k][i] == doctest::Approx(row[i]).epsilon(1e-5));
  }
}

TEST_CASE("constant model has zero input gradient") {
  const Classifier model(small_cnn({3, 8, 8}, 4, 4), Normalization::identity(3));
  std::mt19937_64 rng(3);
  const auto g = model.input_gradient(oracle::random_image({3, 8, 8}, rng), 1, Loss::cross_entropy);
  for (float v : g) CHECK(v == 0.0f);
}

TEST_CASE("bad inputs are rejected") {
  const Classifier model = oracle::random_small_net(1);
  std::mt19937_64 rng(3);
  const ImageTensor img = oracle::random_image(model.input_shape(), rng);
  CHECK_THROWS_AS(model.input_gradient(img, 4, Loss::cross_entropy), InputError);
  CHECK_THROWS_AS(model.input_gradient(img, -1, Loss::class_score), InputError);
  CHECK_THROWS_AS(model.logits(ImageTensor({3, 9, 9})), InputError);
  CHECK_THROWS_AS(ImageTensor({1, 2, 2}, std::vector<float>(3)), InputError);
}

TEST_CASE("batched forward is order-stable for any worker count") {
  std::mt19937_64 rng(8);
  const Classifier model = oracle::random_small_net(5);
  std::vector<ImageTensor> batch;
  for (int i = 0; i < 17; ++i) batch.push_back(oracle::random_image(model.input_shape(), rng));
  const auto serial = model.forward(batch, 1);
  const auto threaded = model.forward(batch, 4);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(serial[i].probs == threaded[i].probs);
    CHECK(serial[i].probs == model.predict(batch[i]).probs);
  }
}

TEST_CASE("parameter gradient matches finite differences of the loss") {
  std::mt19937_64 rng(6);
  Classifier model = oracle::random_small_net(41, {3, 4, 4}, 3, 2);
  const ImageTensor img = oracle::random_image(model.input_shape(), rng);
  std::vector<float> grad(model.parameters().size(), 0.0f);
  model.accumulate_parameter_gradient(img, 2, grad);
  auto loss = [&] { return -std::log(oracle::softmax(oracle::logits(model, img))[2]); };
  const double h = 1e-3;
  for (std::size_t i = 0; i < grad.size(); i += 7) {
    const float keep = model.parameters()[i];
    model.parameters()[i] = keep + static_cast<float>(h);
    const double up = loss();
    model.parameters()[i] = keep - static_cast<float>(h);
    const double down = loss();
    model.parameters()[i] = keep;
    const double numeric = (up - down) / (2 * h);
    CHECK(grad[i] == doctest::Approx(numeric).epsilon(2e-2).scale(1e-3));
  }
}

TEST_CASE("fingerprint tracks the parameters") {
  Classifier a = oracle::random_small_net(1);
  const std::string before = a.fingerprint();
  CHECK(before.size() == 8);
  CHECK(oracle::random_small_net(1).fingerprint() == before);
  a.parameters()[0] += 1.0f;
  CHECK(a.fingerprint() != before);
}
