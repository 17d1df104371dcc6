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

#include <random>

#include "doctest.h"
#include "json.hpp"
#include "oracle.hpp"
#include "smce/detector.hpp"
#include "smce/error.hpp"

using namespace smce;

TEST_CASE("strict decision rule") {
  CHECK_FALSE(exceeds_threshold(0.1, 0.1));
  CHECK(exceeds_threshold(0.1000001, 0.1));
  CHECK_FALSE(exceeds_threshold(0.0, 0.0));
  CHECK(DetectorConfig{}.threshold == 0.1);
}

TEST_CASE("config validation") {
  DetectorConfig c;
  CHECK_NOTHROW(c.validate(10));
  c.threshold = 3.33;
  CHECK_THROWS_AS(c.validate(10), ConfigError);
  c.threshold = -0.01;
  CHECK_THROWS_AS(c.validate(10), ConfigError);
  c.threshold = 1.0;
  CHECK_NOTHROW(c.validate(2));
}

TEST_CASE("uniform model flags everything below the maximum") {
  const Classifier model(small_cnn({3, 8, 8}, 4, 2), Normalization::identity(3));
  std::mt19937_64 rng(1);
  const ImageTensor img = oracle::random_image({3, 8, 8}, rng);
  DetectorConfig c;
  c.mask = {3, 3, 0};
  const DetectionOutcome o = swm_aed(model, img, c);
  CHECK(o.smce == doctest::Approx(2.0));
  CHECK(o.is_adversarial);
  c.threshold = 2.0;
  CHECK_FALSE(swm_aed(model, img, c).is_adversarial);
}

TEST_CASE("decisions are monotone in the threshold") {
  std::mt19937_64 rng(2);
  const Classifier model = oracle::random_small_net(3);
  std::vector<ImageTensor> imgs;
  for (int i = 0; i < 12; ++i) imgs.push_back(oracle::random_image(model.input_shape(), rng));
  DetectorConfig c;
  c.mask = {3, 2, 0};
  int previous = static_cast<int>(imgs.size()) + 1;
  for (double t = 0.0; t <= 2.0; t += 0.1) {
    c.threshold = t;
    int flagged = 0;
    for (const auto& o : detect_batch(model, imgs, c)) flagged += o.is_adversarial;
    CHECK(flagged <= previous);
    previous = flagged;
  }
}

TEST_CASE("batch detection equals the per-image loop") {
  std::mt19937_64 rng(3);
  const Classifier model = oracle::random_small_net(4);
  std::vector<ImageTensor> imgs;
  for (int i = 0; i < 9; ++i) imgs.push_back(oracle::random_image(model.input_shape(), rng));
  DetectorConfig c;
  c.threshold = 0.5;
  c.mask = {4, 4, 0.5f};
  const auto batch = detect_batch(model, imgs, c, 3);
  REQUIRE(batch.size() == imgs.size());
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    const DetectionOutcome o = swm_aed(model, imgs[i], c);
    CHECK(batch[i].smce == o.smce);
    CHECK(batch[i].is_adversarial == o.is_adversarial);
    CHECK(batch[i].threshold == 0.5);
  }
  CHECK(detect_batch(model, std::vector<ImageTensor>{}, c).empty());
}

TEST_CASE("jsonl records") {
  const DetectionOutcome o{0.25, true, 0.1};
  const auto plain = nlohmann::json::parse(outcome_jsonl(3, o));
  CHECK(plain["index"] == 3);
  CHECK(plain["smce"] == 0.25);
  CHECK(plain["is_adversarial"] == true);
  CHECK_FALSE(plain.contains("truth"));
  const std::string line = outcome_jsonl(4, o, true, "PGD");
  CHECK(line.rfind("{\"index\":4,\"smce\":0.25,\"threshold\":0.1,\"is_adversarial\":true,", 0) == 0);
  const auto full = nlohmann::json::parse(line);
  CHECK(full["truth"] == true);
  CHECK(full["attack"] == "PGD");
}
