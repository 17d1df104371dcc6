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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smce/smce.hpp"

namespace smce {

inline constexpr double kDefaultThreshold = 0.1;

struct DetectorConfig {
  double threshold = kDefaultThreshold;  // bits
  MaskSpec mask;

  void validate(int num_classes) const;
};

struct DetectionOutcome {
  double smce = 0.0;
  bool is_adversarial = false;  // smce > threshold, strictly
  double threshold = kDefaultThreshold;
};

// The decision rule alone, for callers that already hold an SMCE value.
inline bool exceeds_threshold(double smce, double threshold) { return smce > threshold; }

/// Sliding-window-mask adversarial example detection: flags `image` when its
/// SMCE under `config.mask` is strictly above `config.threshold`. Only the
/// occluded predictions are consulted.
DetectionOutcome swm_aed(const Classifier& model, const ImageTensor& image,
                         const DetectorConfig& config);

// Order-preserving; images are fanned out over `jobs` workers.
std::vector<DetectionOutcome> detect_batch(const Classifier& model,
                                           std::span<const ImageTensor> images,
                                           const DetectorConfig& config, int jobs = 1);

// One JSON-lines record: {"index","smce","threshold","is_adversarial"} plus
// "truth" and "attack" when given.
std::string outcome_jsonl(std::size_t index, const DetectionOutcome& outcome,
                          std::optional<bool> truth = {}, const std::string& attack = {});

}  // namespace smce
