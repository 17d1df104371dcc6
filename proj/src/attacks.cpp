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

#include "smce/attacks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>

namespace smce {

namespace {

// Per-element box: the epsilon ball around the clean input intersected with
// the valid pixel range.
struct Box {
  std::vector<float> lower;
  std::vector<float> upper;

  Box(const ImageTensor& clean, float epsilon)
      : lower(clean.data.size()), upper(clean.data.size()) {
    for (std::size_t i = 0; i < clean.data.size(); ++i) {
      lower[i] = std::max(0.0f, clean.data[i] - epsilon);
      upper[i] = std::min(1.0f, clean.data[i] + epsilon);
    }
  }

  void project(ImageTensor& x) const {
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      x.data[i] = std::clamp(x.data[i], lower[i], upper[i]);
    }
  }
};

float sign(float v) { return v > 0.0f ? 1.0f : (v < 0.0f ? -1.0f : 0.0f); }

AdversarialResult finish(const Classifier& model, const ImageTensor& clean, ImageTensor adv,
                         int original_label, int iterations) {
  AdversarialResult r;
  r.adversarial_label = model.predict_label(adv);
  r.original_label = original_label;
  r.success = r.adversarial_label != original_label;
  r.linf = linf_distance(clean, adv);
  r.l0 = l0_pixels(clean, adv);
  r.iterations = iterations;
  r.adversarial = std::move(adv);
  r.adversarial.label = clean.label;
  return r;
}

void random_start(ImageTensor& x, const Box& box, float epsilon, std::uint64_t seed) {
  if (epsilon <= 0.0f) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-epsilon, epsilon);
  for (float& v : x.data) v += dist(rng);
  box.project(x);
}

// x <- proj(x + alpha * sign(grad CE(x, label))) repeated `steps` times.
void sign_steps(const Classifier& model, ImageTensor& x, int label, float alpha, int steps,
                const Box& box) {
  for (int k = 0; k < steps; ++k) {
    const auto g = model.input_gradient(x, label, Loss::cross_entropy);
    for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += alpha * sign(g[i]);
    box.project(x);
  }
}

}  // namespace

void AttackSpec::validate() const {
  if (!(epsilon >= 0.0f)) throw ConfigError("attack " + name + ": epsilon must be >= 0");
  if (iterations < 1) throw ConfigError("attack " + name + ": iterations must be >= 1");
  if (!(step >= 0.0f)) throw ConfigError("attack " + name + ": step must be >= 0");
  if (max_iterations < 0 || max_pixels < 0 || pixels < 0 || trials < 0) {
    throw ConfigError("attack " + name + ": budgets must be non-negative");
  }
}

AttackSpec default_attack_spec(std::string_view name) {
  AttackSpec spec;
  spec.name = std::string(name);
  if (name == "FFGSM") {
    spec.step = 10.0f / 255.0f;
  } else if (name == "DeepFool" || name == "JSMA" || name == "OnePixel") {
    spec.epsilon = 1.0f;
  }
  return spec;
}

AdversarialResult fgsm(const Classifier& model, const ImageTensor& image, const AttackSpec& spec) {
  spec.validate();
  const int label = model.predict_label(image);
  const Box box(image, spec.epsilon);
  ImageTensor x = image;
  sign_steps(model, x, label, spec.epsilon, 1, box);
  return finish(model, image, std::move(x), label, 1);
}

AdversarialResult ffgsm(const Classifier& model, const ImageTensor& image, const AttackSpec& spec) {
  spec.validate();
  const int label = model.predict_label(image);
  const Box box(image, spec.epsilon);
  ImageTensor x = image;
  random_start(x, box, spec.epsilon, spec.seed);
  sign_steps(model, x, label, spec.step, 1, box);
  return finish(model, image, std::move(x), label, 1);
}

AdversarialResult bim(const Classifier& model, const ImageTensor& image, const AttackSpec& spec) {
  spec.validate();
  const int label = model.predict_label(image);
  const Box box(image, spec.epsilon);
  ImageTensor x = image;
  sign_steps(model, x, label, spec.step, spec.iterations, box);
  return finish(model, image, std::move(x), label, spec.iterations);
}

AdversarialResult pgd(const Classifier& model, const ImageTensor& image, const AttackSpec& spec) {
  spec.validate();
  const int label = model.predict_label(image);
  const Box box(image, spec.epsilon);
  ImageTensor x = image;
  random_start(x, box, spec.epsilon, spec.seed);
  sign_steps(model, x, label, spec.step, spec.iterations, box);
  return finish(model, image, std::move(x), label, spec.iterations);
}

AdversarialResult deepfool(const Classifier& model, const ImageTensor& image,
                           const AttackSpec& spec) {
  spec.validate();
  const int label = model.predict_label(image);
  const int classes = model.num_classes();
  const Box box(image, spec.epsilon);
  const std::size_t n = image.data.size();
  std::vector<double> total(n, 0.0);

  auto candidate = [&] {
    ImageTensor x = image;
    for (std::size_t i = 0; i < n; ++i) {
      x.data[i] = static_cast<float>(image.data[i] + (1.0 + spec.overshoot) * total[i]);
    }
    box.project(x);
    return x;
  };

  int iter = 0;
  ImageTensor x = image;
  for (; iter < spec.max_iterations; ++iter) {
    const auto scores = model.logits(x);
    if (argmax(scores) != label) break;
    const auto jac = model.class_jacobian(x);
    // Closest linearised boundary among the other classes.
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    double best_norm2 = 0.0;
    double best_gap = 0.0;
    for (int k = 0; k < classes; ++k) {
      if (k == label) continue;
      double norm2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = static_cast<double>(jac[k][i]) - jac[label][i];
        norm2 += w * w;
      }
      if (norm2 < 1e-24) continue;
      const double gap = static_cast<double>(scores[k]) - scores[label];
      const double dist = std::abs(gap) / std::sqrt(norm2);
      if (dist < best_dist) {
        best = k;
        best_dist = dist;
        best_norm2 = norm2;
        best_gap = gap;
      }
    }
    if (best < 0) break;  // flat decision function: no direction to move
    const double coef = (std::abs(best_gap) + 1e-4) / best_norm2;
    for (std::size_t i = 0; i < n; ++i) {
      total[i] += coef * (static_cast<double>(jac[best][i]) - jac[label][i]);
    }
    x = candidate();
  }
  return finish(model, image, std::move(x), label, iter);
}

AdversarialResult jsma(const Classifier& model, const ImageTensor& image, const AttackSpec& spec) {
  spec.validate();
  const auto clean_probs = model.predict(image);
  const int label = clean_probs.argmax();
  int target = -1;
  for (int j = 0; j < static_cast<int>(clean_probs.size()); ++j) {
    if (j == label) continue;
    if (target < 0 || clean_probs[j] > clean_probs[target]) target = j;
  }
  const Box box(image, spec.epsilon);
  const bool increase = spec.theta >= 0.0f;

  ImageTensor x = image;
  std::vector<std::size_t> domain;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    if (increase ? x.data[i] < box.upper[i] : x.data[i] > box.lower[i]) domain.push_back(i);
  }

  int modified = 0;
  int iter = 0;
  while (modified + 2 <= spec.max_pixels && domain.size() >= 2) {
    if (model.predict_label(x) != label) break;
    const auto jac = model.class_jacobian(x);
    const std::size_t d = domain.size();
    std::vector<float> toward(d);
    std::vector<float> others(d, 0.0f);
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t idx = domain[k];
      toward[k] = jac[target][idx];
      for (int j = 0; j < static_cast<int>(jac.size()); ++j) {
        if (j != target) others[k] += jac[j][idx];
      }
    }
    // Saliency of a pair: the target gradient must move the right way while
    // the other classes move the opposite way.
    float best_score = 0.0f;
    std::size_t best_p = d;
    std::size_t best_q = d;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const float a = toward[p] + toward[q];
        const float b = others[p] + others[q];
        const bool ok = increase ? (a > 0.0f && b < 0.0f) : (a < 0.0f && b > 0.0f);
        if (!ok) continue;
        const float score = std::abs(a) * std::abs(b);
        if (score > best_score) {
          best_score = score;
          best_p = p;
          best_q = q;
        }
      }
    }
    if (best_p == d) break;
    for (std::size_t k : {best_p, best_q}) {
      const std::size_t idx = domain[k];
      x.data[idx] = std::clamp(x.data[idx] + spec.theta, box.lower[idx], box.upper[idx]);
    }
    domain.erase(domain.begin() + static_cast<std::ptrdiff_t>(best_q));
    domain.erase(domain.begin() + static_cast<std::ptrdiff_t>(best_p));
    modified += 2;
    ++iter;
  }
  return finish(model, image, std::move(x), label, iter);
}

AdversarialResult one_pixel(const Classifier& model, const ImageTensor& image,
                            const AttackSpec& spec) {
  spec.validate();
  const auto clean_probs = model.predict(image);
  const int label = clean_probs.argmax();
  const Box box(image, spec.epsilon);
  const Shape& s = image.shape;

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> row(0, s.height - 1);
  std::uniform_int_distribution<int> col(0, s.width - 1);
  std::uniform_real_distribution<float> value(0.0f, 1.0f);

  ImageTensor best = image;
  float best_conf = clean_probs[label];
  int trial = 0;
  if (spec.pixels > 0) {
    for (; trial < spec.trials; ++trial) {
      ImageTensor x = image;
      for (int p = 0; p < spec.pixels; ++p) {
        const int y = row(rng);
        const int xx = col(rng);
        for (int c = 0; c < s.channels; ++c) x.at(c, y, xx) = value(rng);
      }
      box.project(x);
      const auto probs = model.predict(x);
      if (probs.argmax() != label) {
        best = std::move(x);
        ++trial;
        break;
      }
      if (probs[label] < best_conf) {
        best_conf = probs[label];
        best = std::move(x);
      }
    }
  }
  return finish(model, image, std::move(best), label, trial);
}

// ---------------------------------------------------------------------------

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

AttackRegistry::AttackRegistry() {
  attacks_ = {{"FGSM", fgsm},         {"FFGSM", ffgsm}, {"BIM", bim},          {"PGD", pgd},
              {"DeepFool", deepfool}, {"JSMA", jsma},   {"OnePixel", one_pixel}};
  stubs_ = {"APGD", "Pixle", "Pixel", "PIFGSMPP"};
}

const AttackFn& AttackRegistry::lookup(std::string_view name) const {
  const std::string key = lower(name);
  for (const auto& [attack, fn] : attacks_) {
    if (lower(attack) == key) return fn;
  }
  for (const auto& stub : stubs_) {
    if (lower(stub) == key) {
      throw UnimplementedAttack("attack '" + stub +
                                "' is registered but not implemented: APGD, Pixle/Pixel and "
                                "PIFGSM++ are cited baselines kept out of scope");
    }
  }
  throw ConfigError("unknown attack '" + std::string(name) + "'");
}

bool AttackRegistry::implemented(std::string_view name) const {
  const std::string key = lower(name);
  return std::any_of(attacks_.begin(), attacks_.end(),
                     [&](const auto& entry) { return lower(entry.first) == key; });
}

std::vector<std::string> AttackRegistry::implemented_names() const {
  std::vector<std::string> names;
  for (const auto& entry : attacks_) names.push_back(entry.first);
  return names;
}

std::vector<std::string> AttackRegistry::stub_names() const { return stubs_; }

const AttackRegistry& attack_registry() {
  static const AttackRegistry registry;
  return registry;
}

AdversarialResult run_attack(const Classifier& model, const ImageTensor& image,
                             const AttackSpec& spec, std::size_t source_index) {
  AdversarialResult r = attack_registry().lookup(spec.name)(model, image, spec);
  r.source_index = source_index;
  return r;
}

}  // namespace smce
