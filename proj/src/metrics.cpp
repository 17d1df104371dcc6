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

#include "smce/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "smce/error.hpp"

namespace smce {

ConfusionMatrix confusion(std::span<const LabeledDecision> decisions) {
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    if (!d.truth) throw InputError("confusion: decision " + std::to_string(i) + " has no truth");
    if (*d.truth) {
      (d.predicted_adversarial ? cm.tp : cm.fn) += 1;
    } else {
      (d.predicted_adversarial ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.tp < 0 || cm.fp < 0 || cm.fn < 0 || cm.tn < 0) {
    throw InputError("metrics: negative confusion count");
  }
  if (cm.total() == 0) throw InputError("metrics: empty confusion matrix");
  MetricsReport r;
  auto ratio = [&r](long num, long den) {
    if (den == 0) {
      r.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  const double p = ratio(cm.tp, cm.tp + cm.fp);
  const double rec = ratio(cm.tp, cm.tp + cm.fn);
  r.precision = 100.0 * p;
  r.recall = 100.0 * rec;
  r.accuracy = 100.0 * static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  if (p + rec > 0.0) {
    r.f1 = 2.0 * p * rec / (p + rec);
  } else {
    r.degenerate = true;
    r.f1 = 0.0;
  }
  return r;
}

ConfusionMatrix confusion_at(std::span<const double> clean, std::span<const double> adversarial,
                             double threshold) {
  ConfusionMatrix cm;
  for (double s : adversarial) (s > threshold ? cm.tp : cm.fn) += 1;
  for (double s : clean) (s > threshold ? cm.fp : cm.tn) += 1;
  return cm;
}

std::vector<double> default_threshold_grid(int num_classes, double step) {
  if (num_classes < 2 || !(step > 0.0)) throw InputError("threshold grid: bad arguments");
  const double top = std::log2(static_cast<double>(num_classes));
  const auto count = static_cast<int>(std::floor(top / step + 1e-9));
  std::vector<double> grid;
  for (int k = 0; k <= count; ++k) grid.push_back(k * step);
  return grid;
}

SweepCurve threshold_sweep(std::span<const double> clean, std::span<const double> adversarial,
                           std::span<const double> grid, std::string attack) {
  if (grid.empty()) throw InputError("threshold_sweep: empty threshold grid");
  if (clean.empty() || adversarial.empty()) throw InputError("threshold_sweep: empty score list");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InputError("threshold_sweep: grid must increase strictly");
  }
  // Sort once, then count by binary search at every threshold.
  std::vector<double> c(clean.begin(), clean.end());
  std::vector<double> a(adversarial.begin(), adversarial.end());
  std::sort(c.begin(), c.end());
  std::sort(a.begin(), a.end());
  const double total = static_cast<double>(c.size() + a.size());

  SweepCurve curve;
  curve.attack = std::move(attack);
  curve.thresholds.assign(grid.begin(), grid.end());
  curve.best_accuracy = -1.0;
  for (double t : grid) {
    const auto clean_le = std::upper_bound(c.begin(), c.end(), t) - c.begin();
    const auto adv_gt = a.end() - std::upper_bound(a.begin(), a.end(), t);
    const double acc = 100.0 * static_cast<double>(clean_le + adv_gt) / total;
    curve.accuracy.push_back(acc);
    if (acc > curve.best_accuracy) {
      curve.best_accuracy = acc;
      curve.best_threshold = t;
    }
  }
  return curve;
}

HeldOutResult held_out_best(std::span<const double> clean, std::span<const double> adversarial,
                            std::span<const double> grid) {
  std::vector<double> fit_clean, fit_adv, test_clean, test_adv;
  for (std::size_t i = 0; i < clean.size(); ++i) (i % 2 ? test_clean : fit_clean).push_back(clean[i]);
  for (std::size_t i = 0; i < adversarial.size(); ++i) {
    (i % 2 ? test_adv : fit_adv).push_back(adversarial[i]);
  }
  if (test_clean.empty() || test_adv.empty()) {
    throw InputError("held_out_best: each group needs at least two scores");
  }
  HeldOutResult r;
  r.threshold = threshold_sweep(fit_clean, fit_adv, grid).best_threshold;
  r.matrix = confusion_at(test_clean, test_adv, r.threshold);
  r.report = metrics(r.matrix);
  return r;
}

DistributionSummary distribution_summary(std::string group, std::span<const double> samples,
                                         int bins, double upper) {
  if (samples.size() < 2) throw InputError("distribution_summary: need at least two samples");
  if (bins < 1 || !(upper > 0.0)) throw InputError("distribution_summary: bad histogram range");
  DistributionSummary s;
  s.group = std::move(group);
  s.n = samples.size();
  for (int b = 0; b <= bins; ++b) s.bin_edges.push_back(upper * b / bins);
  s.counts.assign(bins, 0);
  double sum = 0.0;
  for (double v : samples) {
    const int b = std::clamp(static_cast<int>(std::floor(v / upper * bins)), 0, bins - 1);
    ++s.counts[b];
    sum += v;
  }
  s.mean = sum / static_cast<double>(s.n);
  double sq = 0.0;
  for (double v : samples) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(s.n));
  return s;
}

}  // namespace smce
