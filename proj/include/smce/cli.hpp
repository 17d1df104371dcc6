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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "smce/config.hpp"
#include "smce/detector.hpp"
#include "smce/eval_set.hpp"
#include "smce/report.hpp"

namespace smce::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kDataError = 3;
inline constexpr int kNumericError = 4;
inline constexpr int kInternalError = 1;

int exit_code_for(const std::exception& e);

// Writes config.json (the canonical document) and run.json (command, config
// hash, seed) into `directory`.
void write_run_sidecar(const RunConfig& config, const std::string& command,
                       const std::filesystem::path& directory);

struct TrainSummary {
  double test_accuracy = 0.0;
  std::vector<EpochStats> history;
};

// Trains the configured model; writes model.ckpt, model_epoch<k>.ckpt for
// each snapshot epoch, and train_log.csv.
TrainSummary cmd_train(const RunConfig& config, const std::filesystem::path& out_dir,
                       std::ostream& log);

// Builds the evaluation set and saves it under out_dir (manifest + tensors).
EvalSet cmd_attack(const RunConfig& config, const Classifier& model,
                   const std::filesystem::path& out_dir, std::ostream& log);

struct SmceRequest {
  std::filesystem::path input;  // .ppm image or .tensors stack
  MaskSpec mask;
  std::optional<std::filesystem::path> mefm_prefix;  // writes <prefix>[_i].ppm/.csv
  int cell_pixels = 16;
  int jobs = 1;
};

// One JSON object per input image: {smce, entropies, mask, model_id}, one per
// line.
std::string cmd_smce(const Classifier& model, const SmceRequest& request);

// JSON-lines outcomes. `pool` is an eval-set directory (clean images first,
// then each attack, with truth) or a bare .tensors file.
std::string cmd_detect(const Classifier& model, const std::filesystem::path& pool,
                       const DetectorConfig& config, int jobs);

// Tables, sweeps and distributions for every configured mask size.
ExperimentReport cmd_report(const RunConfig& config, const Classifier& model, const EvalSet& set,
                            const std::filesystem::path& out_dir);
// Empty tables for the named attacks at each mask size; nothing is scored.
void cmd_report_dry_run(const RunConfig& config, const std::vector<std::string>& attacks,
                        const std::filesystem::path& out_dir);

// JSON form of one SMCE result.
std::string smce_json(const SmceResult& result);

}  // namespace smce::cli
