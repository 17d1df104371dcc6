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

#include "smce/cli.hpp"

#include <cstdio>
#include <ostream>

#include "bytes.hpp"
#include "json.hpp"
#include "smce/checkpoint.hpp"
#include "smce/error.hpp"
#include "smce/tensor_io.hpp"

namespace smce::cli {

using nlohmann::ordered_json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
  if (dynamic_cast<const NumericError*>(&e)) return kNumericError;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const InputError*>(&e)) return kDataError;
  return kInternalError;
}

void write_run_sidecar(const RunConfig& config, const std::string& command,
                       const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  detail::write_text(directory / "config.json", config.dump());
  ordered_json run;
  run["command"] = command;
  run["config_hash"] = config.hash();
  run["seed"] = config.seed;
  detail::write_text(directory / "run.json", run.dump(1) + "\n");
}

TrainSummary cmd_train(const RunConfig& config, const std::filesystem::path& out_dir,
                       std::ostream& log) {
  const LabeledDataset train_set = load_split(config.dataset, Split::train, config.seed);
  const LabeledDataset test_set = load_split(config.dataset, Split::test, config.seed);
  if (train_set.images.empty()) throw DataError("training split is empty");

  const Architecture arch = architecture_by_name(config.model.architecture, train_set.shape(),
                                                 train_set.num_classes(), config.model.width);
  Classifier model =
      Classifier::he_initialized(arch, channel_statistics(train_set), config.seed);

  std::filesystem::create_directories(out_dir);
  write_run_sidecar(config, "train", out_dir);
  TrainParams params = config.model.training;
  params.seed = config.seed;

  const auto on_epoch = [&](const EpochStats& s, const Classifier& current) {
    char line[160];
    std::snprintf(line, sizeof line, "epoch %d  loss %.4f  train %.2f%%  test %.2f%%\n", s.epoch,
                  s.train_loss, s.train_accuracy, s.val_accuracy);
    log << line << std::flush;
    for (int e : config.model.snapshot_epochs) {
      if (e == s.epoch) {
        save_checkpoint(current, out_dir / ("model_epoch" + std::to_string(e) + ".ckpt"));
      }
    }
    return true;
  };
  TrainResult result = train(std::move(model), train_set, test_set, params, on_epoch);
  save_checkpoint(result.model, out_dir / "model.ckpt");

  std::string csv = "epoch,train_loss,train_accuracy_pct,test_accuracy_pct\n";
  for (const auto& s : result.history) {
    char line[128];
    std::snprintf(line, sizeof line, "%d,%.6f,%.4f,%.4f\n", s.epoch, s.train_loss,
                  s.train_accuracy, s.val_accuracy);
    csv += line;
  }
  detail::write_text(out_dir / "train_log.csv", csv);

  TrainSummary summary;
  summary.history = result.history;
  summary.test_accuracy = result.history.empty() ? accuracy(result.model, test_set, config.jobs)
                                                 : result.history.back().val_accuracy;
  return summary;
}

EvalSet cmd_attack(const RunConfig& config, const Classifier& model,
                   const std::filesystem::path& out_dir, std::ostream& log) {
  const LabeledDataset test_set = load_split(config.dataset, Split::test, config.seed);
  EvalSet set = sample_eval_set(test_set, model, config.attacks, config.n_clean, config.n_adv,
                                config.seed, config.jobs);
  save_eval_set(set, out_dir);
  write_run_sidecar(config, "attack", out_dir);
  for (const auto& pool : set.pools) {
    log << pool.attack() << ": " << pool.success_count() << "/" << pool.entries.size()
        << " label flips\n";
  }
  return set;
}

std::string smce_json(const SmceResult& result) {
  ordered_json j;
  j["smce"] = result.smce;
  j["entropies"] = result.entropies;
  j["mask"] = {{"size", result.mask.size},
               {"stride", result.mask.stride},
               {"fill", result.mask.fill}};
  j["model_id"] = result.model_id;
  return j.dump();
}

std::string cmd_smce(const Classifier& model, const SmceRequest& request) {
  std::vector<ImageTensor> images;
  if (request.input.extension() == ".ppm") {
    images.push_back(read_ppm(request.input));
  } else {
    images = load_tensors(request.input);
  }
  std::string out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const SmceResult r = compute_smce(model, images[i], request.mask, request.jobs);
    out += smce_json(r) + "\n";
    if (request.mefm_prefix) {
      std::string stem = request.mefm_prefix->string();
      if (images.size() > 1) stem += "_" + std::to_string(i);
      const EntropyFieldMap map = to_field_map(r, model.num_classes());
      render_mefm(map, stem + ".ppm", request.cell_pixels);
      detail::write_text(stem + ".csv", mefm_csv(map));
    }
  }
  return out;
}

std::string cmd_detect(const Classifier& model, const std::filesystem::path& pool,
                       const DetectorConfig& config, int jobs) {
  std::string out;
  if (std::filesystem::is_directory(pool)) {
    const EvalSet set = load_eval_set(pool);
    std::size_t index = 0;
    for (const auto& o : detect_batch(model, set.clean, config, jobs)) {
      out += outcome_jsonl(index++, o, false) + "\n";
    }
    for (const auto& p : set.pools) {
      for (const auto& o : detect_batch(model, p.images, config, jobs)) {
        out += outcome_jsonl(index++, o, true, p.attack()) + "\n";
      }
    }
    return out;
  }
  const auto images = load_tensors(pool);
  std::size_t index = 0;
  for (const auto& o : detect_batch(model, images, config, jobs)) {
    out += outcome_jsonl(index++, o) + "\n";
  }
  return out;
}

namespace {

ReportOptions report_options(const RunConfig& config, int num_classes) {
  ReportOptions options;
  options.mask_sizes = config.mask_sizes;
  options.stride = config.stride;
  options.fill = config.fill;
  options.grid = default_threshold_grid(num_classes, config.grid_step);
  options.jobs = config.jobs;
  return options;
}

}  // namespace

ExperimentReport cmd_report(const RunConfig& config, const Classifier& model, const EvalSet& set,
                            const std::filesystem::path& out_dir) {
  ExperimentReport report =
      experiment_report(set, model, report_options(config, model.num_classes()));
  write_report(report, out_dir);
  write_run_sidecar(config, "report", out_dir);
  return report;
}

void cmd_report_dry_run(const RunConfig& config, const std::vector<std::string>& attacks,
                        const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (int size : config.mask_sizes) {
    detail::write_text(out_dir / ("table_mask" + std::to_string(size) + ".csv"),
                       table_skeleton_csv(attacks, size));
  }
  write_run_sidecar(config, "report --dry-run", out_dir);
}

}  // namespace smce::cli
