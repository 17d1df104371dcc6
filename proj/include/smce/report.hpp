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
#include <optional>
#include <string>
#include <vector>

#include "smce/eval_set.hpp"
#include "smce/metrics.hpp"
#include "smce/smce.hpp"

namespace smce {

struct ReportOptions {
  std::vector<int> mask_sizes{3, 7, 9};
  std::optional<int> stride;  // default_stride() per size when unset
  float fill = 0.0f;
  std::vector<double> grid;  // default_threshold_grid() when empty
  int histogram_bins = 20;
  int jobs = 1;
};

// One table row: the best-threshold detection result for one attack.
struct AttackRow {
  std::string attack;
  int mask_size = 0;
  double threshold = 0.0;
  ConfusionMatrix matrix;
  MetricsReport metrics;
};

struct MaskSizeReport {
  int mask_size = 0;
  int stride = 0;
  std::vector<double> clean_scores;
  std::vector<std::vector<double>> adversarial_scores;  // parallel to EvalSet::pools
  std::vector<AttackRow> rows;             // every attack output
  std::vector<AttackRow> successful_rows;  // only outputs that flipped the label
  std::vector<AttackRow> held_out_rows;    // threshold fit on one half, scored on the other
  std::vector<SweepCurve> sweeps;
  std::vector<DistributionSummary> distributions;  // "clean" first, then one per attack
};

struct ExperimentReport {
  std::string model_id;
  int num_classes = 0;
  std::vector<std::string> attacks;
  std::vector<MaskSizeReport> sizes;

  const MaskSizeReport& at_mask(int size) const;
};

/// Scores every clean and adversarial image at each mask size and derives
/// the per-attack tables, sweeps and SMCE distributions. Each attack is
/// compared against an equally sized prefix of the clean pool.
ExperimentReport experiment_report(const EvalSet& set, const Classifier& model,
                                   const ReportOptions& options);

// CSV header shared by every table file.
inline constexpr const char* kTableHeader =
    "attack,mask_size,threshold,precision_pct,recall_pct,f1,accuracy_pct";

std::string table_csv(const std::vector<AttackRow>& rows);
// Empty-valued table in the same schema, one row per attack name.
std::string table_skeleton_csv(const std::vector<std::string>& attacks, int mask_size);
std::string sweeps_json(const std::vector<SweepCurve>& sweeps);
std::string sweeps_gnuplot(const std::vector<SweepCurve>& sweeps);
std::string distributions_json(const std::vector<DistributionSummary>& groups);
std::string summary_json(const ExperimentReport& report);

// Writes table_mask<s>.csv (+ _successful, _heldout), sweep_mask<s>.json/.dat,
// distribution_mask<s>.json, scores_mask<s>.csv and summary.json.
void write_report(const ExperimentReport& report, const std::filesystem::path& directory);

}  // namespace smce
