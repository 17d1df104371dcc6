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

// Command-line front end: train, attack, smce, detect and report.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "smce/checkpoint.hpp"
#include "smce/cli.hpp"
#include "smce/error.hpp"

namespace {

struct MaskFlags {
  int size = 7;
  std::optional<int> stride;
  float fill = 0.0f;

  void add_to(CLI::App* app) {
    app->add_option("--mask-size", size, "occlusion window edge in pixels")->capture_default_str();
    app->add_option("--stride", stride, "pixels between window origins (default: see README)");
    app->add_option("--fill", fill, "occlusion value in [0,1]")->capture_default_str();
  }

  smce::MaskSpec resolve(const smce::Classifier& model) const {
    const auto shape = model.input_shape();
    return {size, stride.value_or(smce::default_stride(size, shape.height, shape.width)), fill};
  }
};

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw smce::DataError("cannot write " + out_path);
  out << text;
}

smce::RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed,
                            std::optional<int> jobs) {
  smce::RunConfig config = smce::RunConfig::load(path);
  if (seed) {
    config.seed = *seed;
    config.model.training.seed = *seed;
    for (auto& a : config.attacks) a.seed = *seed;
  }
  if (jobs) config.jobs = *jobs;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sliding-mask confidence entropy: adversarial example detection"};
  app.require_subcommand(1);

  std::string config_path;
  std::string checkpoint;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;

  auto common = [&](CLI::App* cmd, bool needs_config, bool needs_checkpoint) {
    if (needs_config) cmd->add_option("--config", config_path, "run config (JSON)")->required();
    if (needs_checkpoint) {
      cmd->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
    }
    cmd->add_option("--out", out, "output directory or file");
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--jobs", jobs, "worker threads");
  };

  auto* train_cmd = app.add_subcommand("train", "train a classifier and save a checkpoint");
  common(train_cmd, true, false);

  auto* attack_cmd = app.add_subcommand("attack", "build the clean and adversarial pools");
  common(attack_cmd, true, true);

  auto* smce_cmd = app.add_subcommand("smce", "SMCE of an image (.ppm) or tensor stack");
  common(smce_cmd, false, true);
  std::string input;
  std::string mefm_prefix;
  int cell_pixels = 16;
  MaskFlags smce_mask;
  smce_cmd->add_option("--input", input, "image (.ppm) or .tensors file")->required();
  smce_cmd->add_option("--mefm", mefm_prefix, "write entropy field map <prefix>.ppm/.csv");
  smce_cmd->add_option("--cell-pixels", cell_pixels, "MEFM cell size in pixels")
      ->capture_default_str();
  smce_mask.add_to(smce_cmd);

  auto* detect_cmd = app.add_subcommand("detect", "flag adversarial inputs (JSON lines)");
  common(detect_cmd, false, true);
  std::string pool;
  double threshold = smce::kDefaultThreshold;
  MaskFlags detect_mask;
  detect_cmd->add_option("--pool", pool, "eval-set directory or .tensors file")->required();
  detect_cmd->add_option("--threshold", threshold, "SMCE threshold in bits")
      ->capture_default_str();
  detect_mask.add_to(detect_cmd);

  auto* report_cmd = app.add_subcommand("report", "tables, sweeps and SMCE distributions");
  common(report_cmd, true, false);
  std::string report_pool;
  std::vector<int> report_sizes;
  std::optional<int> report_stride;
  std::optional<float> report_fill;
  bool dry_run = false;
  report_cmd->add_option("--checkpoint", checkpoint, "model checkpoint");
  report_cmd->add_option("--pool", report_pool, "eval-set directory from 'attack'");
  report_cmd->add_option("--mask-size", report_sizes, "mask sizes (repeatable)");
  report_cmd->add_option("--stride", report_stride, "stride for every mask size");
  report_cmd->add_option("--fill", report_fill, "occlusion value in [0,1]");
  report_cmd->add_flag("--dry-run", dry_run, "write empty tables for the full attack list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : smce::cli::kConfigError;
  }

  try {
    if (*train_cmd) {
      const auto config = load_config(config_path, seed, jobs);
      const auto summary = smce::cli::cmd_train(config, out.empty() ? config.output : out, std::cerr);
      std::cout << "test accuracy " << summary.test_accuracy << "%\n";
    } else if (*attack_cmd) {
      const auto config = load_config(config_path, seed, jobs);
      const auto model = smce::load_checkpoint(checkpoint);
      smce::cli::cmd_attack(config, model, out.empty() ? config.output + "/pools" : out, std::cout);
    } else if (*smce_cmd) {
      const auto model = smce::load_checkpoint(checkpoint);
      smce::cli::SmceRequest request;
      request.input = input;
      request.mask = smce_mask.resolve(model);
      if (!mefm_prefix.empty()) request.mefm_prefix = mefm_prefix;
      request.cell_pixels = cell_pixels;
      request.jobs = jobs.value_or(1);
      emit(smce::cli::cmd_smce(model, request), out);
    } else if (*detect_cmd) {
      const auto model = smce::load_checkpoint(checkpoint);
      smce::DetectorConfig config{threshold, detect_mask.resolve(model)};
      emit(smce::cli::cmd_detect(model, pool, config, jobs.value_or(1)), out);
    } else if (*report_cmd) {
      auto config = load_config(config_path, seed, jobs);
      if (!report_sizes.empty()) config.mask_sizes = report_sizes;
      if (report_stride) config.stride = report_stride;
      if (report_fill) config.fill = *report_fill;
      const std::string dir = out.empty() ? config.output + "/report" : out;
      if (dry_run) {
        std::vector<std::string> names = smce::attack_registry().implemented_names();
        for (const auto& stub : {"APGD", "Pixle", "PIFGSMPP"}) names.emplace_back(stub);
        smce::cli::cmd_report_dry_run(config, names, dir);
      } else {
        if (checkpoint.empty() || report_pool.empty()) {
          throw smce::ConfigError("report needs --checkpoint and --pool (or --dry-run)");
        }
        const auto model = smce::load_checkpoint(checkpoint);
        const auto set = smce::load_eval_set(report_pool);
        smce::cli::cmd_report(config, model, set, dir);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return smce::cli::exit_code_for(e);
  }
  return smce::cli::kOk;
}
