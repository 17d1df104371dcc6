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
#include <optional>
#include <string>
#include <vector>

#include "smce/attacks.hpp"
#include "smce/dataset.hpp"
#include "smce/train.hpp"

namespace smce {

struct DatasetConfig {
  std::string kind = "synthetic";  // "synthetic" or "cifar10"
  std::string path;                // CIFAR-10 batch directory
  int classes = 10;                // synthetic only
  int train_per_class = 300;       // synthetic only
  int test_per_class = 100;        // synthetic only
  int image_size = 32;             // synthetic only
};

struct ModelConfig {
  std::string architecture = "small";
  int width = 16;
  TrainParams training;
  std::vector<int> snapshot_epochs;  // extra checkpoints saved after these epochs
};

/// One versioned document describing a whole run. Copied next to every
/// output so each table can be regenerated from its sidecar.
struct RunConfig {
  static constexpr int kVersion = 1;

  std::uint64_t seed = 0;
  DatasetConfig dataset;
  ModelConfig model;
  std::vector<AttackSpec> attacks;
  std::size_t n_clean = 200;
  std::size_t n_adv = 100;
  std::vector<int> mask_sizes{3, 7, 9};
  std::optional<int> stride;
  float fill = 0.0f;
  double threshold = 0.1;
  double grid_step = 0.05;
  // Execution settings, excluded from dump() and hash().
  int jobs = 1;
  std::string output = "out";

  // Throws ConfigError on malformed values, unknown or stub attacks, or a
  // missing seed.
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);
  std::string dump() const;  // canonical experiment settings
  std::string hash() const;  // CRC32 of dump(), 8 hex digits
};

// The seven implemented attacks at their default budgets, seeded with `seed`.
std::vector<AttackSpec> default_attacks(std::uint64_t seed);

// Train/test splits named by the dataset section.
LabeledDataset load_split(const DatasetConfig& config, Split split, std::uint64_t seed);

}  // namespace smce
