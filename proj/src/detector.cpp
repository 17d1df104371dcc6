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

#include "smce/detector.hpp"

#include <cmath>

#include "json.hpp"
#include "smce/error.hpp"
#include "smce/parallel.hpp"

namespace smce {

void DetectorConfig::validate(int num_classes) const {
  const double top = std::log2(static_cast<double>(num_classes));
  if (!(threshold >= 0.0 && threshold <= top)) {
    throw ConfigError("threshold " + std::to_string(threshold) + " outside [0, log2 m = " +
                      std::to_string(top) + "]");
  }
}

DetectionOutcome swm_aed(const Classifier& model, const ImageTensor& image,
                         const DetectorConfig& config) {
  config.validate(model.num_classes());
  const SmceResult r = compute_smce(model, image, config.mask);
  return {r.smce, exceeds_threshold(r.smce, config.threshold), config.threshold};
}

std::vector<DetectionOutcome> detect_batch(const Classifier& model,
                                           std::span<const ImageTensor> images,
                                           const DetectorConfig& config, int jobs) {
  config.validate(model.num_classes());
  std::vector<DetectionOutcome> out(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) { out[i] = swm_aed(model, images[i], config); });
  return out;
}

std::string outcome_jsonl(std::size_t index, const DetectionOutcome& outcome,
                          std::optional<bool> truth, const std::string& attack) {
  nlohmann::ordered_json j;
  j["index"] = index;
  j["smce"] = outcome.smce;
  j["threshold"] = outcome.threshold;
  j["is_adversarial"] = outcome.is_adversarial;
  if (truth) j["truth"] = *truth;
  if (!attack.empty()) j["attack"] = attack;
  return j.dump();
}

}  // namespace smce
