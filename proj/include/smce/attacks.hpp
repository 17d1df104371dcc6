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

#include <cstdint>
#include <functional>
#include <utility>
#include <string>
#include <string_view>
#include <vector>

#include "smce/error.hpp"
#include "smce/image.hpp"
#include "smce/network.hpp"

namespace smce {

/// Budget and knobs for one attack. Every attack projects its output onto
/// the L-infinity ball of radius `epsilon` around the input and onto [0,1];
/// epsilon = 1 therefore leaves the L0-style attacks unconstrained.
struct AttackSpec {
  std::string name;
  float epsilon = 8.0f / 255.0f;
  float step = 2.0f / 255.0f;  // alpha for the iterative sign attacks
  int iterations = 10;
  // DeepFool
  float overshoot = 0.02f;
  int max_iterations = 50;
  // JSMA
  int max_pixels = 40;  // budget on modified features (channel values)
  float theta = 1.0f;
  // OnePixel
  int pixels = 1;
  int trials = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

// Community-standard CIFAR-10 settings for the named attack.
AttackSpec default_attack_spec(std::string_view name);

struct AdversarialResult {
  std::size_t source_index = 0;
  ImageTensor adversarial;
  int original_label = -1;     // model's prediction on the clean input
  int adversarial_label = -1;  // model's prediction on `adversarial`
  bool success = false;        // labels differ
  float linf = 0.0f;
  int l0 = 0;  // spatial pixels changed
  int iterations = 0;
};

AdversarialResult fgsm(const Classifier& model, const ImageTensor& image, const AttackSpec& spec);
AdversarialResult ffgsm(const Classifier& model, const ImageTensor& image, const AttackSpec& spec);
AdversarialResult bim(const Classifier& model, const ImageTensor& image, const AttackSpec& spec);
AdversarialResult pgd(const Classifier& model, const ImageTensor& image, const AttackSpec& spec);
AdversarialResult deepfool(const Classifier& model, const ImageTensor& image,
                           const AttackSpec& spec);
AdversarialResult jsma(const Classifier& model, const ImageTensor& image, const AttackSpec& spec);
AdversarialResult one_pixel(const Classifier& model, const ImageTensor& image,
                            const AttackSpec& spec);

using AttackFn =
    std::function<AdversarialResult(const Classifier&, const ImageTensor&, const AttackSpec&)>;

// Raised when a registered name has no implementation in this build.
class UnimplementedAttack : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class AttackRegistry {
 public:
  // Throws UnimplementedAttack for the stub names, ConfigError otherwise.
  const AttackFn& lookup(std::string_view name) const;
  bool implemented(std::string_view name) const;
  std::vector<std::string> implemented_names() const;  // registration order
  std::vector<std::string> stub_names() const;

 private:
  friend const AttackRegistry& attack_registry();
  AttackRegistry();

  std::vector<std::pair<std::string, AttackFn>> attacks_;
  std::vector<std::string> stubs_;
};

const AttackRegistry& attack_registry();

// Runs the named attack and stamps `source_index` on the result.
AdversarialResult run_attack(const Classifier& model, const ImageTensor& image,
                             const AttackSpec& spec, std::size_t source_index);

}  // namespace smce
