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

namespace smce {

// Positive class = adversarial.
struct ConfusionMatrix {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;

  long total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct LabeledDecision {
  bool predicted_adversarial = false;
  std::optional<bool> truth;  // true = adversarial
};

// Throws InputError if any decision lacks ground truth.
ConfusionMatrix confusion(std::span<const LabeledDecision> decisions);

struct MetricsReport {
  double precision = 0.0;  // percent
  double recall = 0.0;     // percent
  double accuracy = 0.0;   // percent
  double f1 = 0.0;         // in [0,1]
  // Set when a ratio had a zero denominator and was reported as 0.
  bool degenerate = false;
};

// Throws InputError on an empty matrix.
MetricsReport metrics(const ConfusionMatrix& cm);

// Decisions of the rule (score > t) over a clean group and an adversarial group.
ConfusionMatrix confusion_at(std::span<const double> clean, std::span<const double> adversarial,
                             double threshold);

// 0, 0.05, 0.10, ... up to log2(num_classes).
std::vector<double> default_threshold_grid(int num_classes, double step = 0.05);

struct SweepCurve {
  std::string attack;
  std::vector<double> thresholds;  // strictly increasing
  std::vector<double> accuracy;    // percent, one per threshold
  double best_threshold = 0.0;     // first (smallest) threshold reaching the max
  double best_accuracy = 0.0;
};

SweepCurve threshold_sweep(std::span<const double> clean, std::span<const double> adversarial,
                           std::span<const double> grid, std::string attack = {});

// Threshold picked on the even-indexed half of each group, scored on the
// odd-indexed half.
struct HeldOutResult {
  double threshold = 0.0;
  MetricsReport report;
  ConfusionMatrix matrix;
};
HeldOutResult held_out_best(std::span<const double> clean, std::span<const double> adversarial,
                            std::span<const double> grid);

struct DistributionSummary {
  std::string group;
  std::size_t n = 0;
  std::vector<double> bin_edges;  // bins + 1 values
  std::vector<long> counts;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

// Histogram over [0, upper] (top edge inclusive) plus a moment-matched
// Gaussian. Needs at least two samples.
DistributionSummary distribution_summary(std::string group, std::span<const double> samples,
                                         int bins, double upper);

}  // namespace smce
