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

#include "smce/eval_set.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "bytes.hpp"
#include "json.hpp"
#include "smce/error.hpp"
#include "smce/parallel.hpp"
#include "smce/tensor_io.hpp"

namespace smce {

using nlohmann::json;

std::size_t AdversarialPool::success_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const PoolEntry& e) { return e.success; }));
}

const AdversarialPool& EvalSet::pool(std::string_view attack) const {
  for (const auto& p : pools) {
    if (p.attack() == attack) return p;
  }
  throw InputError("eval set has no pool for attack '" + std::string(attack) + "'");
}

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t count,
                                        std::uint64_t seed, std::uint64_t stream) {
  if (count > population) {
    throw InputError("cannot draw " + std::to_string(count) + " images from " +
                     std::to_string(population));
  }
  std::vector<std::size_t> all(population);
  std::iota(all.begin(), all.end(), 0);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  // Partial Fisher-Yates: the first `count` slots are a uniform draw.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, population - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(count);
  return all;
}

EvalSet sample_eval_set(const LabeledDataset& test, const Classifier& model,
                        const std::vector<AttackSpec>& attacks, std::size_t n_clean,
                        std::size_t n_adv, std::uint64_t seed, int jobs) {
  EvalSet set;
  set.seed = seed;
  set.clean_indices = sample_indices(test.size(), n_clean, seed, 0);
  for (std::size_t i : set.clean_indices) set.clean.push_back(test.images[i]);

  for (std::size_t a = 0; a < attacks.size(); ++a) {
    const AttackSpec& spec = attacks[a];
    attack_registry().lookup(spec.name);  // fail fast on unknown or stub names
    AdversarialPool pool;
    pool.spec = spec;
    const auto sources = sample_indices(test.size(), n_adv, seed, a + 1);
    std::vector<AdversarialResult> results(sources.size());
    parallel_for(sources.size(), jobs, [&](std::size_t i) {
      AttackSpec local = spec;
      local.seed = spec.seed + sources[i];
      results[i] = run_attack(model, test.images[sources[i]], local, sources[i]);
    });
    for (auto& r : results) {
      PoolEntry e;
      e.source_index = r.source_index;
      e.true_label = test.images[r.source_index].label.value_or(-1);
      e.original_label = r.original_label;
      e.adversarial_label = r.adversarial_label;
      e.success = r.success;
      e.linf = r.linf;
      e.l0 = r.l0;
      pool.entries.push_back(e);
      pool.images.push_back(std::move(r.adversarial));
    }
    set.pools.push_back(std::move(pool));
  }
  return set;
}

namespace {

json spec_json(const AttackSpec& s) {
  return json{{"name", s.name},
              {"epsilon", s.epsilon},
              {"step", s.step},
              {"iterations", s.iterations},
              {"overshoot", s.overshoot},
              {"max_iterations", s.max_iterations},
              {"max_pixels", s.max_pixels},
              {"theta", s.theta},
              {"pixels", s.pixels},
              {"trials", s.trials},
              {"seed", s.seed}};
}

AttackSpec spec_from_json(const json& j) {
  AttackSpec s;
  s.name = j.at("name").get<std::string>();
  s.epsilon = j.at("epsilon").get<float>();
  s.step = j.at("step").get<float>();
  s.iterations = j.at("iterations").get<int>();
  s.overshoot = j.at("overshoot").get<float>();
  s.max_iterations = j.at("max_iterations").get<int>();
  s.max_pixels = j.at("max_pixels").get<int>();
  s.theta = j.at("theta").get<float>();
  s.pixels = j.at("pixels").get<int>();
  s.trials = j.at("trials").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

std::string pool_file(const std::string& attack) { return attack + ".tensors"; }

}  // namespace

std::string manifest_json(const EvalSet& set) {
  json j;
  j["format"] = "smce-evalset/1";
  j["seed"] = set.seed;
  j["clean_indices"] = set.clean_indices;
  std::vector<int> clean_labels;
  for (const auto& img : set.clean) clean_labels.push_back(img.label.value_or(-1));
  j["clean_labels"] = clean_labels;
  j["clean_file"] = "clean.tensors";
  json attacks = json::array();
  for (const auto& pool : set.pools) {
    json entries = json::array();
    for (const auto& e : pool.entries) {
      entries.push_back({{"source_index", e.source_index},
                         {"true_label", e.true_label},
                         {"original_label", e.original_label},
                         {"adversarial_label", e.adversarial_label},
                         {"success", e.success},
                         {"linf", e.linf},
                         {"l0", e.l0}});
    }
    attacks.push_back({{"attack", pool.attack()},
                       {"file", pool_file(pool.attack())},
                       {"spec", spec_json(pool.spec)},
                       {"entries", std::move(entries)}});
  }
  j["attacks"] = std::move(attacks);
  return j.dump(1) + "\n";
}

void save_eval_set(const EvalSet& set, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const Shape shape = !set.clean.empty()                                    ? set.clean.front().shape
                      : (!set.pools.empty() && !set.pools[0].images.empty()) ? set.pools[0].images[0].shape
                                                                             : Shape{};
  save_tensors(set.clean, shape, directory / "clean.tensors");
  for (const auto& pool : set.pools) {
    save_tensors(pool.images, shape, directory / pool_file(pool.attack()));
  }
  detail::write_text(directory / "manifest.json", manifest_json(set));
}

EvalSet load_eval_set(const std::filesystem::path& directory) {
  const auto raw = detail::read_file(directory / "manifest.json");
  json j;
  try {
    j = json::parse(raw.begin(), raw.end());
  } catch (const json::exception& e) {
    throw DataError("eval set manifest: " + std::string(e.what()));
  }
  try {
    EvalSet set;
    set.seed = j.at("seed").get<std::uint64_t>();
    set.clean_indices = j.at("clean_indices").get<std::vector<std::size_t>>();
    const auto labels = j.at("clean_labels").get<std::vector<int>>();
    set.clean = load_tensors(directory / j.at("clean_file").get<std::string>());
    if (set.clean.size() != set.clean_indices.size() || labels.size() != set.clean.size()) {
      throw DataError("eval set: clean tensor count does not match the manifest");
    }
    for (std::size_t i = 0; i < set.clean.size(); ++i) {
      if (labels[i] >= 0) set.clean[i].label = labels[i];
    }
    for (const auto& a : j.at("attacks")) {
      AdversarialPool pool;
      pool.spec = spec_from_json(a.at("spec"));
      for (const auto& e : a.at("entries")) {
        PoolEntry entry;
        entry.source_index = e.at("source_index").get<std::size_t>();
        entry.true_label = e.at("true_label").get<int>();
        entry.original_label = e.at("original_label").get<int>();
        entry.adversarial_label = e.at("adversarial_label").get<int>();
        entry.success = e.at("success").get<bool>();
        entry.linf = e.at("linf").get<float>();
        entry.l0 = e.at("l0").get<int>();
        pool.entries.push_back(entry);
      }
      pool.images = load_tensors(directory / a.at("file").get<std::string>());
      if (pool.images.size() != pool.entries.size()) {
        throw DataError("eval set: tensor count for " + pool.attack() +
                        " does not match the manifest");
      }
      for (std::size_t i = 0; i < pool.images.size(); ++i) {
        if (pool.entries[i].true_label >= 0) pool.images[i].label = pool.entries[i].true_label;
      }
      set.pools.push_back(std::move(pool));
    }
    return set;
  } catch (const json::exception& e) {
    throw DataError("eval set manifest: " + std::string(e.what()));
  }
}

}  // namespace smce
