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

#include "smce/report.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "bytes.hpp"
#include "json.hpp"
#include "smce/error.hpp"
#include "smce/parallel.hpp"

namespace smce {

using nlohmann::ordered_json;

namespace {

std::vector<double> score_all(const Classifier& model, const std::vector<ImageTensor>& images,
                              const MaskSpec& mask, int jobs) {
  std::vector<double> out(images.size());
  parallel_for(images.size(), jobs,
               [&](std::size_t i) { out[i] = compute_smce(model, images[i], mask).smce; });
  return out;
}

AttackRow best_row(const std::string& attack, int mask_size, std::span<const double> clean,
                   std::span<const double> adv, std::span<const double> grid) {
  AttackRow row;
  row.attack = attack;
  row.mask_size = mask_size;
  if (clean.empty() || adv.empty()) return row;
  const SweepCurve curve = threshold_sweep(clean, adv, grid, attack);
  row.threshold = curve.best_threshold;
  row.matrix = confusion_at(clean, adv, row.threshold);
  row.metrics = metrics(row.matrix);
  return row;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

const MaskSizeReport& ExperimentReport::at_mask(int size) const {
  for (const auto& s : sizes) {
    if (s.mask_size == size) return s;
  }
  throw InputError("report has no mask size " + std::to_string(size));
}

ExperimentReport experiment_report(const EvalSet& set, const Classifier& model,
                                   const ReportOptions& options) {
  if (set.clean.empty()) throw InputError("experiment_report: empty clean pool");
  ExperimentReport report;
  report.model_id = model.fingerprint();
  report.num_classes = model.num_classes();
  for (const auto& p : set.pools) report.attacks.push_back(p.attack());

  const Shape shape = model.input_shape();
  const std::vector<double> grid =
      options.grid.empty() ? default_threshold_grid(model.num_classes()) : options.grid;
  const double top = std::log2(static_cast<double>(model.num_classes()));

  for (int size : options.mask_sizes) {
    MaskSpec mask{size, options.stride.value_or(default_stride(size, shape.height, shape.width)),
                  options.fill};
    mask.validate(shape.height, shape.width);
    MaskSizeReport out;
    out.mask_size = size;
    out.stride = mask.stride;
    out.clean_scores = score_all(model, set.clean, mask, options.jobs);
    out.distributions.push_back(
        distribution_summary("clean", out.clean_scores, options.histogram_bins, top));

    for (const auto& pool : set.pools) {
      auto adv = score_all(model, pool.images, mask, options.jobs);
      const std::size_t n = std::min(adv.size(), out.clean_scores.size());
      const std::span<const double> clean(out.clean_scores.data(), n);

      out.rows.push_back(best_row(pool.attack(), size, clean, adv, grid));
      auto sweep = threshold_sweep(clean, adv, grid, pool.attack());
      out.sweeps.push_back(std::move(sweep));

      std::vector<double> succeeded;
      for (std::size_t i = 0; i < adv.size(); ++i) {
        if (pool.entries[i].success) succeeded.push_back(adv[i]);
      }
      const std::size_t k = std::min(succeeded.size(), out.clean_scores.size());
      out.successful_rows.push_back(
          best_row(pool.attack(), size, std::span<const double>(out.clean_scores.data(), k),
                   succeeded, grid));

      AttackRow held;
      held.attack = pool.attack();
      held.mask_size = size;
      if (n >= 2 && adv.size() >= 2) {
        const auto h = held_out_best(clean, adv, grid);
        held.threshold = h.threshold;
        held.matrix = h.matrix;
        held.metrics = h.report;
      }
      out.held_out_rows.push_back(held);

      if (adv.size() >= 2) {
        out.distributions.push_back(
            distribution_summary(pool.attack(), adv, options.histogram_bins, top));
      }
      out.adversarial_scores.push_back(std::move(adv));
    }
    report.sizes.push_back(std::move(out));
  }
  return report;
}

std::string table_csv(const std::vector<AttackRow>& rows) {
  std::string out = std::string(kTableHeader) + "\n";
  for (const auto& r : rows) {
    out += r.attack + "," + std::to_string(r.mask_size) + ",";
    if (r.matrix.total() == 0) {
      out += ",,,,\n";  // no samples for this variant
      continue;
    }
    out += fmt("%.4f", r.threshold) + "," + fmt("%.2f", r.metrics.precision) + "," +
           fmt("%.2f", r.metrics.recall) + "," + fmt("%.4f", r.metrics.f1) + "," +
           fmt("%.2f", r.metrics.accuracy) + "\n";
  }
  return out;
}

std::string table_skeleton_csv(const std::vector<std::string>& attacks, int mask_size) {
  std::string out = std::string(kTableHeader) + "\n";
  for (const auto& a : attacks) out += a + "," + std::to_string(mask_size) + ",,,,,\n";
  return out;
}

std::string sweeps_json(const std::vector<SweepCurve>& sweeps) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : sweeps) {
    ordered_json j;
    j["attack"] = s.attack;
    j["thresholds"] = s.thresholds;
    j["accuracy"] = s.accuracy;
    j["best"] = {{"t", s.best_threshold}, {"acc", s.best_accuracy}};
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::string sweeps_gnuplot(const std::vector<SweepCurve>& sweeps) {
  std::string out = "# threshold";
  for (const auto& s : sweeps) out += " " + s.attack;
  out += "\n";
  if (sweeps.empty()) return out;
  for (std::size_t i = 0; i < sweeps.front().thresholds.size(); ++i) {
    out += fmt("%.4f", sweeps.front().thresholds[i]);
    for (const auto& s : sweeps) out += " " + fmt("%.2f", s.accuracy[i]);
    out += "\n";
  }
  return out;
}

std::string distributions_json(const std::vector<DistributionSummary>& groups) {
  ordered_json arr = ordered_json::array();
  for (const auto& g : groups) {
    ordered_json j;
    j["group"] = g.group;
    j["n"] = g.n;
    j["bin_edges"] = g.bin_edges;
    j["counts"] = g.counts;
    j["fit"] = {{"mean", g.mean}, {"std", g.stddev}};
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::string summary_json(const ExperimentReport& report) {
  ordered_json j;
  j["model_id"] = report.model_id;
  j["num_classes"] = report.num_classes;
  j["attacks"] = report.attacks;
  ordered_json sizes = ordered_json::array();
  for (const auto& s : report.sizes) {
    ordered_json entry;
    entry["mask_size"] = s.mask_size;
    entry["stride"] = s.stride;
    entry["clean_mean_smce"] =
        std::accumulate(s.clean_scores.begin(), s.clean_scores.end(), 0.0) /
        static_cast<double>(s.clean_scores.size());
    ordered_json best = ordered_json::object();
    ordered_json means = ordered_json::object();
    for (std::size_t a = 0; a < s.rows.size(); ++a) {
      best[s.rows[a].attack] = s.rows[a].metrics.accuracy;
      const auto& adv = s.adversarial_scores[a];
      means[s.rows[a].attack] =
          adv.empty() ? 0.0
                      : std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(adv.size());
    }
    entry["best_accuracy_pct"] = std::move(best);
    entry["adversarial_mean_smce"] = std::move(means);
    sizes.push_back(std::move(entry));
  }
  j["mask_sizes"] = std::move(sizes);

  // Which mask size gave the best accuracy per attack (ties: smaller mask).
  ordered_json optimum = ordered_json::object();
  for (std::size_t a = 0; a < report.attacks.size(); ++a) {
    int best_size = 0;
    double best_acc = -1.0;
    for (const auto& s : report.sizes) {
      if (s.rows[a].metrics.accuracy > best_acc) {
        best_acc = s.rows[a].metrics.accuracy;
        best_size = s.mask_size;
      }
    }
    optimum[report.attacks[a]] = best_size;
  }
  j["best_mask_size"] = std::move(optimum);
  return j.dump(1) + "\n";
}

void write_report(const ExperimentReport& report, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& s : report.sizes) {
    const std::string tag = "mask" + std::to_string(s.mask_size);
    detail::write_text(directory / ("table_" + tag + ".csv"), table_csv(s.rows));
    detail::write_text(directory / ("table_" + tag + "_successful.csv"),
                       table_csv(s.successful_rows));
    detail::write_text(directory / ("table_" + tag + "_heldout.csv"), table_csv(s.held_out_rows));
    detail::write_text(directory / ("sweep_" + tag + ".json"), sweeps_json(s.sweeps));
    detail::write_text(directory / ("sweep_" + tag + ".dat"), sweeps_gnuplot(s.sweeps));
    detail::write_text(directory / ("distribution_" + tag + ".json"),
                       distributions_json(s.distributions));
    std::string scores = "group,index,smce\n";
    for (std::size_t i = 0; i < s.clean_scores.size(); ++i) {
      scores += "clean," + std::to_string(i) + "," + fmt("%.9f", s.clean_scores[i]) + "\n";
    }
    for (std::size_t a = 0; a < s.adversarial_scores.size(); ++a) {
      for (std::size_t i = 0; i < s.adversarial_scores[a].size(); ++i) {
        scores += report.attacks[a] + "," + std::to_string(i) + "," +
                  fmt("%.9f", s.adversarial_scores[a][i]) + "\n";
      }
    }
    detail::write_text(directory / ("scores_" + tag + ".csv"), scores);
  }
  detail::write_text(directory / "summary.json", summary_json(report));
}

}  // namespace smce
