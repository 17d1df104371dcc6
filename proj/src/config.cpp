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

#include "smce/config.hpp"

#include <cstdio>

#include "bytes.hpp"
#include "json.hpp"
#include "smce/error.hpp"

namespace smce {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

AttackSpec attack_from_json(const json& j, std::uint64_t seed) {
  if (j.is_string()) {
    AttackSpec s = default_attack_spec(j.get<std::string>());
    s.seed = seed;
    return s;
  }
  AttackSpec s = default_attack_spec(j.at("name").get<std::string>());
  s.seed = seed;
  read(j, "epsilon", s.epsilon);
  read(j, "step", s.step);
  read(j, "iterations", s.iterations);
  read(j, "overshoot", s.overshoot);
  read(j, "max_iterations", s.max_iterations);
  read(j, "max_pixels", s.max_pixels);
  read(j, "theta", s.theta);
  read(j, "pixels", s.pixels);
  read(j, "trials", s.trials);
  read(j, "seed", s.seed);
  return s;
}

}  // namespace

std::vector<AttackSpec> default_attacks(std::uint64_t seed) {
  std::vector<AttackSpec> specs;
  for (const auto& name : attack_registry().implemented_names()) {
    AttackSpec s = default_attack_spec(name);
    s.seed = seed;
    specs.push_back(s);
  }
  return specs;
}

RunConfig RunConfig::parse(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    RunConfig c;
    const int version = j.value("version", kVersion);
    if (version != kVersion) throw ConfigError("config: unsupported version " + std::to_string(version));
    if (!j.contains("seed")) throw ConfigError("config: 'seed' is required");
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      read(d, "kind", c.dataset.kind);
      read(d, "path", c.dataset.path);
      read(d, "classes", c.dataset.classes);
      read(d, "train_per_class", c.dataset.train_per_class);
      read(d, "test_per_class", c.dataset.test_per_class);
      read(d, "image_size", c.dataset.image_size);
    }
    if (c.dataset.kind != "synthetic" && c.dataset.kind != "cifar10") {
      throw ConfigError("config: dataset.kind must be 'synthetic' or 'cifar10'");
    }
    if (c.dataset.kind == "cifar10" && c.dataset.path.empty()) {
      throw ConfigError("config: dataset.path is required for cifar10");
    }
    c.model.training.seed = c.seed;
    if (j.contains("model")) {
      const auto& m = j.at("model");
      read(m, "architecture", c.model.architecture);
      read(m, "width", c.model.width);
      read(m, "epochs", c.model.training.epochs);
      read(m, "batch_size", c.model.training.batch_size);
      read(m, "learning_rate", c.model.training.learning_rate);
      read(m, "momentum", c.model.training.momentum);
      read(m, "snapshot_epochs", c.model.snapshot_epochs);
    }
    if (j.contains("attacks")) {
      for (const auto& a : j.at("attacks")) c.attacks.push_back(attack_from_json(a, c.seed));
    } else {
      c.attacks = default_attacks(c.seed);
    }
    for (const auto& a : c.attacks) {
      attack_registry().lookup(a.name);
      a.validate();
    }
    if (j.contains("protocol")) {
      read(j.at("protocol"), "n_clean", c.n_clean);
      read(j.at("protocol"), "n_adv", c.n_adv);
    }
    if (j.contains("mask")) {
      const auto& m = j.at("mask");
      read(m, "sizes", c.mask_sizes);
      if (m.contains("stride") && !m.at("stride").is_null()) c.stride = m.at("stride").get<int>();
      read(m, "fill", c.fill);
    }
    if (j.contains("detector")) {
      read(j.at("detector"), "threshold", c.threshold);
      read(j.at("detector"), "grid_step", c.grid_step);
    }
    read(j, "jobs", c.jobs);
    read(j, "output", c.output);
    if (c.mask_sizes.empty()) throw ConfigError("config: mask.sizes must not be empty");
    if (!(c.grid_step > 0.0)) throw ConfigError("config: detector.grid_step must be positive");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = detail::read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string RunConfig::dump() const {
  json j;
  j["version"] = kVersion;
  j["seed"] = seed;
  j["dataset"] = {{"kind", dataset.kind},
                  {"path", dataset.path},
                  {"classes", dataset.classes},
                  {"train_per_class", dataset.train_per_class},
                  {"test_per_class", dataset.test_per_class},
                  {"image_size", dataset.image_size}};
  j["model"] = {{"architecture", model.architecture},
                {"width", model.width},
                {"epochs", model.training.epochs},
                {"batch_size", model.training.batch_size},
                {"learning_rate", model.training.learning_rate},
                {"momentum", model.training.momentum},
                {"snapshot_epochs", model.snapshot_epochs}};
  json attacks_json = json::array();
  for (const auto& s : attacks) {
    attacks_json.push_back({{"name", s.name},
                            {"epsilon", s.epsilon},
                            {"step", s.step},
                            {"iterations", s.iterations},
                            {"overshoot", s.overshoot},
                            {"max_iterations", s.max_iterations},
                            {"max_pixels", s.max_pixels},
                            {"theta", s.theta},
                            {"pixels", s.pixels},
                            {"trials", s.trials},
                            {"seed", s.seed}});
  }
  j["attacks"] = std::move(attacks_json);
  j["protocol"] = {{"n_clean", n_clean}, {"n_adv", n_adv}};
  j["mask"] = {{"sizes", mask_sizes},
               {"stride", stride ? json(*stride) : json(nullptr)},
               {"fill", fill}};
  j["detector"] = {{"threshold", threshold}, {"grid_step", grid_step}};
  return j.dump(2) + "\n";
}

std::string RunConfig::hash() const {
  const std::string text = dump();
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x",
                detail::crc32_of({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}));
  return buf;
}

LabeledDataset load_split(const DatasetConfig& config, Split split, std::uint64_t seed) {
  if (config.kind == "cifar10") return load_cifar10(config.path, split);
  const int per_class = split == Split::train ? config.train_per_class : config.test_per_class;
  // Distinct streams for the two splits.
  const std::uint64_t split_seed = seed * 2 + (split == Split::train ? 0 : 1);
  return synth_dataset(config.classes, per_class, config.image_size, split_seed, split);
}

}  // namespace smce
