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
#include <filesystem>
#include <string>
#include <vector>

#include "smce/attacks.hpp"
#include "smce/dataset.hpp"

namespace smce {

struct PoolEntry {
  std::size_t source_index = 0;  // index into the test split
  int true_label = -1;
  int original_label = -1;
  int adversarial_label = -1;
  bool success = false;
  float linf = 0.0f;
  int l0 = 0;
};

struct AdversarialPool {
  AttackSpec spec;
  std::vector<PoolEntry> entries;
  std::vector<ImageTensor> images;  // entries[i] describes images[i]

  const std::string& attack() const { return spec.name; }
  std::size_t success_count() const;
};

/// Clean control group plus one adversarial pool per attack, all drawn from
/// the same test split and recorded by source index.
struct EvalSet {
  std::uint64_t seed = 0;
  std::vector<std::size_t> clean_indices;
  std::vector<ImageTensor> clean;
  std::vector<AdversarialPool> pools;

  const AdversarialPool& pool(std::string_view attack) const;
};

// Uniform draw of `count` distinct indices out of [0, population),
// deterministic in (seed, stream).
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t count,
                                        std::uint64_t seed, std::uint64_t stream);

/// Draws the clean pool without replacement, then for each attack a fresh
/// draw of `n_adv` sources which are attacked (per-image seed = spec.seed +
/// source index). Throws InputError if a pool exceeds the test split.
EvalSet sample_eval_set(const LabeledDataset& test, const Classifier& model,
                        const std::vector<AttackSpec>& attacks, std::size_t n_clean,
                        std::size_t n_adv, std::uint64_t seed, int jobs = 1);

// Directory layout: manifest.json, clean.tensors, <attack>.tensors.
void save_eval_set(const EvalSet& set, const std::filesystem::path& directory);
EvalSet load_eval_set(const std::filesystem::path& directory);
std::string manifest_json(const EvalSet& set);

}  // namespace smce
