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

// Acceptance run: one PASS / FAIL / BLOCKED line per criterion.
//
//   acceptance                 criteria 1-11; the CIFAR-10 ones run only when
//                              SMCE_CIFAR10_DIR is set, otherwise a synthetic
//                              stand-in is scored and printed as INFO
//   acceptance --cifar10-only  criteria 5, 6 and 9 on CIFAR-10; exit 77 when
//                              SMCE_CIFAR10_DIR is unset
//
// Exit status is 0 unless a criterion fails that is not listed as an expected
// red in the README.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "oracle.hpp"
#include "smce/attacks.hpp"
#include "smce/checkpoint.hpp"
#include "smce/cli.hpp"
#include "smce/config.hpp"
#include "smce/dataset.hpp"
#include "smce/detector.hpp"
#include "smce/eval_set.hpp"
#include "smce/metrics.hpp"
#include "smce/report.hpp"
#include "smce/smce.hpp"
#include "smce/tensor_io.hpp"
#include "smce/train.hpp"

using namespace smce;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Tally {
  int pass = 0;
  int fail = 0;
  int expected_red = 0;
  int blocked = 0;
} tally;

void line(const char* id, const char* status, const std::string& detail) {
  std::printf("[%-7s] %-4s %s\n", status, id, detail.c_str());
  std::fflush(stdout);
}

void verdict(const char* id, bool ok, const std::string& detail) {
  line(id, ok ? "PASS" : "FAIL", detail);
  (ok ? tally.pass : tally.fail) += 1;
}

void info(const std::string& detail) {
  std::printf("          INFO %s\n", detail.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// --- 1 ------------------------------------------------------------------

void entropy_bounds() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::exponential_distribution<double> e(1.0);
  double worst_excess = -1.0;
  double worst_low = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const int m = 2 + static_cast<int>(rng() % 99);
    std::vector<double> raw(m);
    for (double& v : raw) v = e(rng);
    if (n % 3 == 1) raw[rng() % m] += 1e7;
    if (n % 5 == 2) raw[rng() % m] = 0.0;
    const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    ProbVector p;
    for (double v : raw) p.probs.push_back(static_cast<float>(v / sum));
    const double h = confidence_entropy(p);
    worst_excess = std::max(worst_excess, h - std::log2(m));
    worst_low = std::min(worst_low, h);
  }
  for (int n = 0; n < 200; ++n) {
    const int m = 2 + n % 9;
    const Classifier model = oracle::random_small_net(5000 + n, {3, 8, 8}, m, 2);
    const ImageTensor img = oracle::random_image({3, 8, 8}, rng);
    const SmceResult r = compute_smce(model, img, {1 + n % 8, 1 + n % 5, 0.0f});
    for (double h : r.entropies) {
      worst_excess = std::max(worst_excess, h - std::log2(m));
      worst_low = std::min(worst_low, h);
    }
    worst_excess = std::max(worst_excess, r.smce - std::log2(m));
  }
  double uniform_gap = 0.0;
  for (int m = 2; m <= 100; ++m) {
    const ProbVector u{std::vector<float>(m, 1.0f / static_cast<float>(m))};
    uniform_gap = std::max(uniform_gap, std::abs(confidence_entropy(u) - std::log2(m)));
  }
  const Classifier flat(small_cnn({3, 8, 8}, 10, 2), Normalization::identity(3));
  const double flat_smce = compute_smce(flat, ImageTensor({3, 8, 8}, 0.5f), {3, 3, 0}).smce;
  uniform_gap = std::max(uniform_gap, std::abs(flat_smce - std::log2(10.0)));
  const double elapsed = seconds_since(t0);
  verdict("1", worst_low >= 0.0 && worst_excess <= 1e-9 && uniform_gap <= 1e-9 && elapsed < 60,
          fmt("entropy bounds: min %.3g, max excess over log2 m %.3g (tol 1e-9), uniform gap "
              "%.3g (tol 1e-9), %.1fs (< 60s)",
              worst_low, worst_excess, uniform_gap, elapsed));
}

// --- 2 ------------------------------------------------------------------

void gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  double worst = 0.0;
  long compared = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Classifier model = oracle::random_small_net(seed, {3, 8, 8}, 4, 4);
    const ImageTensor img = oracle::random_image(model.input_shape(), rng);
    const int target = static_cast<int>(seed % 4);
    for (Loss loss : {Loss::cross_entropy, Loss::class_score}) {
      const auto analytic = model.input_gradient(img, target, loss);
      const auto numeric =
          oracle::finite_difference_gradient(model, img, target, loss == Loss::class_score, 1e-6);
      for (std::size_t i = 0; i < numeric.size(); ++i) {
        if (std::abs(numeric[i]) <= 1e-4) continue;
        const double rel = std::abs(analytic[i] - numeric[i]) /
                           std::max(std::abs(static_cast<double>(analytic[i])), std::abs(numeric[i]));
        worst = std::max(worst, rel);
        ++compared;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  verdict("2", worst < 1e-3 && compared > 0 && elapsed < 300,
          fmt("input gradients vs central differences on 5 nets: max rel err %.3g over %ld "
              "components (tol 1e-3), %.1fs (< 300s)",
              worst, compared, elapsed));
}

// --- 3 ------------------------------------------------------------------

void oracle_equivalence() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    const int size = 8 + static_cast<int>(rng() % 9);
    const Classifier model = oracle::random_small_net(7000 + n, {3, size, size}, 2 + n % 9, 3);
    const ImageTensor img = oracle::random_image(model.input_shape(), rng);
    const int mask = 1 + static_cast<int>(rng() % size);
    const int stride = 1 + static_cast<int>(rng() % size);
    const float fill = static_cast<float>(rng() % 5) / 4.0f;
    const SmceResult r = compute_smce(model, img, {mask, stride, fill}, 1 + n % 3);
    worst = std::max(worst, std::abs(r.smce - oracle::smce(model, img, mask, stride, fill)));
  }
  verdict("3", worst <= 1e-6,
          fmt("batched SMCE vs serial brute-force oracle on 50 triples: max |diff| %.3g (tol 1e-6)",
              worst));
}

// --- 4 ------------------------------------------------------------------

void attack_contracts() {
  const auto t0 = Clock::now();
  const Shape shape{3, 16, 16};
  const LabeledDataset train_set = synth_dataset(10, 30, 16, 404, Split::train);
  const LabeledDataset test_set = synth_dataset(10, 10, 16, 405, Split::test);
  TrainParams params;
  params.epochs = 3;
  const Classifier model =
      train(Classifier::he_initialized(small_cnn(shape, 10, 8), channel_statistics(train_set), 4),
            train_set, {}, params)
          .model;
  bool ok = true;
  std::string detail;
  for (const auto& name : attack_registry().implemented_names()) {
    const AttackSpec spec = default_attack_spec(name);
    AttackSpec zero = spec;
    zero.epsilon = 0.0f;
    float worst_linf = 0.0f;
    bool range_ok = true;
    bool identity_ok = true;
    int flipped = 0;
    for (std::size_t i = 0; i < 100; ++i) {
      AttackSpec s = spec;
      s.seed = i;
      const auto r = run_attack(model, test_set.images[i], s, i);
      range_ok = range_ok && r.adversarial.valid();
      worst_linf = std::max(worst_linf, linf_distance(test_set.images[i], r.adversarial));
      flipped += r.success;
      if (i < 20) {
        identity_ok = identity_ok &&
                      run_attack(model, test_set.images[i], zero, i).adversarial.data ==
                          test_set.images[i].data;
      }
    }
    const bool this_ok = range_ok && identity_ok && worst_linf <= spec.epsilon + 1e-6f;
    ok = ok && this_ok;
    detail += fmt(" %s(linf %.4f/%.4f, flips %d)%s", name.c_str(), worst_linf, spec.epsilon, flipped,
                  this_ok ? "" : "!");
  }
  verdict("4", ok,
          fmt("attack contracts, 100 images each, range [0,1], linf <= eps, eps=0 identity "
              "(%.0fs):",
              seconds_since(t0)) +
              detail);
}

// --- 5, 6, 8, 9 -----------------------------------------------------------

struct ProtocolRun {
  double full_accuracy = 0.0;
  double early_accuracy = 0.0;
  ExperimentReport full;
  ExperimentReport early;  // mask 7 only
  fs::path report_dir;
  double seconds = 0.0;
};

ProtocolRun run_protocol(const RunConfig& config, const fs::path& work) {
  const auto t0 = Clock::now();
  ProtocolRun out;
  const LabeledDataset train_set = load_split(config.dataset, Split::train, config.seed);
  const LabeledDataset test_set = load_split(config.dataset, Split::test, config.seed);
  const Shape shape = train_set.shape();
  const Classifier init = Classifier::he_initialized(
      architecture_by_name(config.model.architecture, shape, train_set.num_classes(), config.model.width),
      channel_statistics(train_set), config.seed);
  std::optional<Classifier> early;
  const TrainResult trained =
      train(init, train_set, {}, config.model.training, [&](const EpochStats& s, const Classifier& m) {
        if (s.epoch == 1) early = m;
        return true;
      });
  out.full_accuracy = accuracy(trained.model, test_set, config.jobs);
  out.early_accuracy = accuracy(*early, test_set, config.jobs);
  info(fmt("backbone: %s width %d, test accuracy %.2f%% (early checkpoint after epoch 1: %.2f%%), "
           "%.0fs",
           config.model.architecture.c_str(), config.model.width, out.full_accuracy,
           out.early_accuracy, seconds_since(t0)));

  ReportOptions options;
  options.mask_sizes = config.mask_sizes;
  options.jobs = config.jobs;
  const EvalSet set = sample_eval_set(test_set, trained.model, config.attacks, config.n_clean,
                                      config.n_adv, config.seed, config.jobs);
  out.full = experiment_report(set, trained.model, options);
  out.report_dir = work / "report";
  write_report(out.full, out.report_dir);

  options.mask_sizes = {7};
  const EvalSet early_set = sample_eval_set(test_set, *early, config.attacks, config.n_clean,
                                            config.n_adv, config.seed, config.jobs);
  out.early = experiment_report(early_set, *early, options);
  out.seconds = seconds_since(t0);
  return out;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct Outcome {
  bool ok = false;
  std::string detail;
};

Outcome separation(const ProtocolRun& run) {
  const MaskSizeReport& m7 = run.full.at_mask(7);
  std::size_t fgsm = 0;
  while (run.full.attacks[fgsm] != "FGSM") ++fgsm;
  const double clean = mean(m7.clean_scores);
  const double adv = mean(m7.adversarial_scores[fgsm]);
  const bool ok = adv > clean && adv >= 1.5 * clean && m7.stride == 8 &&
                  m7.adversarial_scores[fgsm].size() == 100 && m7.clean_scores.size() == 200;
  return {ok, fmt("mean SMCE at 7x7/stride %d: FGSM %.4f (n=%zu) vs clean %.4f (n=%zu), ratio %.2f "
                  "(need > 1.5)",
                  m7.stride, adv, m7.adversarial_scores[fgsm].size(), clean, m7.clean_scores.size(),
                  adv / clean)};
}

Outcome detection_accuracy(const ProtocolRun& run) {
  const MaskSizeReport& m7 = run.full.at_mask(7);
  int hits = 0;
  std::string detail;
  for (const auto& row : m7.rows) {
    hits += row.metrics.accuracy >= 62.0;
    detail += fmt(" %s %.1f", row.attack.c_str(), row.metrics.accuracy);
  }
  return {hits >= 4, fmt("best-threshold accuracy >= 62%% on %d of %zu attacks (need 4):", hits,
                         m7.rows.size()) +
                         detail};
}

Outcome accuracy_correlation(const ProtocolRun& run) {
  const MaskSizeReport& full = run.full.at_mask(7);
  const MaskSizeReport& early = run.early.at_mask(7);
  int higher = 0;
  std::string detail;
  for (std::size_t a = 0; a < full.rows.size(); ++a) {
    higher += full.rows[a].metrics.accuracy > early.rows[a].metrics.accuracy;
    detail += fmt(" %s %.1f/%.1f", full.rows[a].attack.c_str(), full.rows[a].metrics.accuracy,
                  early.rows[a].metrics.accuracy);
  }
  const bool ordered = run.full_accuracy > run.early_accuracy;
  return {ordered && higher >= 5,
          fmt("checkpoints %.1f%% vs %.1f%%: detection higher for the stronger one on %d of %zu "
              "attacks (need 5), full/early:",
              run.full_accuracy, run.early_accuracy, higher, full.rows.size()) +
              detail};
}

void mask_size_trend(const ProtocolRun& run) {
  bool tables = true;
  std::string detail;
  for (int s : {3, 7, 9}) {
    tables = tables && fs::exists(run.report_dir / fmt("table_mask%d.csv", s));
    const auto& rows = run.full.at_mask(s).rows;
    double sum = 0.0;
    for (const auto& r : rows) sum += r.metrics.accuracy;
    detail += fmt(" %dx%d mean %.1f", s, s, sum / static_cast<double>(rows.size()));
  }
  verdict("8", tables, "tables at mask sizes 3, 7, 9 written; per-size best accuracy:" + detail);
  int seven_best = 0;
  const auto& attacks = run.full.attacks;
  for (std::size_t a = 0; a < attacks.size(); ++a) {
    const double a7 = run.full.at_mask(7).rows[a].metrics.accuracy;
    seven_best += a7 >= run.full.at_mask(3).rows[a].metrics.accuracy &&
                  a7 >= run.full.at_mask(9).rows[a].metrics.accuracy;
  }
  info(fmt("7x7 is the best mask size for %d of %zu attacks (informational)", seven_best,
           attacks.size()));
}

RunConfig protocol_config(bool cifar, const char* cifar_dir) {
  RunConfig c;
  c.seed = 2026;
  if (cifar) {
    c.dataset.kind = "cifar10";
    c.dataset.path = cifar_dir;
    c.model.training.epochs = 6;
  } else {
    c.dataset.train_per_class = 200;
    c.dataset.test_per_class = 50;
    c.model.training.epochs = 4;
  }
  c.model.training.seed = c.seed;
  c.attacks = default_attacks(c.seed);
  c.jobs = jobs();
  return c;
}

fs::path work_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("smce_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void cifar_criteria(const char* dir) {
  const ProtocolRun run = run_protocol(protocol_config(true, dir), work_dir("cifar10"));
  const bool backbone_ok = run.full_accuracy >= 60.0;
  const Outcome sep = separation(run);
  verdict("5", backbone_ok && sep.ok,
          fmt("[CIFAR-10, backbone %.1f%% (need >= 60), %.0fs] ", run.full_accuracy, run.seconds) +
              sep.detail);
  const Outcome det = detection_accuracy(run);
  verdict("6", det.ok, "[CIFAR-10] " + det.detail);
  const Outcome cor = accuracy_correlation(run);
  verdict("9", cor.ok, "[CIFAR-10] " + cor.detail);
}

void blocked(const char* id, const std::string& what) {
  line(id, "BLOCKED", what + " needs CIFAR-10; set SMCE_CIFAR10_DIR to the binary batch directory");
  ++tally.blocked;
}

void surrogate_and_mask_sizes(bool have_cifar) {
  const ProtocolRun run = run_protocol(protocol_config(false, nullptr), work_dir("synthetic"));
  if (!have_cifar) {
    blocked("5", "separation of FGSM vs clean SMCE");
    info("synthetic stand-in: " + separation(run).detail);
    blocked("6", "best-threshold detection accuracy");
    info("synthetic stand-in: " + detection_accuracy(run).detail);
    blocked("9", "accuracy-correlation trend");
    info("synthetic stand-in: " + accuracy_correlation(run).detail);
  }
  mask_size_trend(run);
  info(fmt("synthetic protocol run took %.0fs", run.seconds));
}

// --- 7 ------------------------------------------------------------------

void metrics_fidelity() {
  const MetricsReport r = metrics({194, 8, 6, 192});
  const auto two = [](double v) { return std::round(v * 100.0) / 100.0; };
  verdict("7a", two(r.precision) == 96.04 && two(r.recall) == 97.00 && two(r.accuracy) == 96.50,
          fmt("{tp 194, fp 8, fn 6, tn 192}: precision %.2f (96.04), recall %.2f (97.00), "
              "accuracy %.2f (96.50)",
              r.precision, r.recall, r.accuracy));
  // The reference row prints F1 as 0.96, but 2tp/(2tp+fp+fn) = 388/402 rounds
  // to 0.97. Reported red rather than bending the formula.
  const bool f1_ok = two(r.f1) == 0.96;
  const std::string detail =
      fmt("F1 %.5f displays as %.2f at 2 d.p. (reference prints 0.96)", r.f1, two(r.f1));
  if (f1_ok) {
    verdict("7b", true, detail);
  } else {
    line("7b", "FAIL", detail + "; expected red, reference row is inconsistent with its own P/R");
    ++tally.expected_red;
  }
}

// --- 10 -----------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void determinism() {
  const char* config_text = R"({
    "version": 1, "seed": 99,
    "dataset": {"kind": "synthetic", "classes": 4, "train_per_class": 30, "test_per_class": 15, "image_size": 16},
    "model": {"architecture": "small", "width": 4, "epochs": 2},
    "protocol": {"n_clean": 12, "n_adv": 8},
    "mask": {"sizes": [3, 7, 9]}
  })";
  std::vector<fs::path> dirs;
  std::ostringstream log;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = work_dir(fmt("determinism_%d", run));
    RunConfig config = RunConfig::parse(config_text);
    config.jobs = run == 0 ? 1 : 3;  // schedule must not leak into outputs
    cli::cmd_train(config, dir / "train", log);
    const Classifier model = load_checkpoint(dir / "train" / "model.ckpt");
    cli::cmd_attack(config, model, dir / "pools", log);
    cli::cmd_report(config, model, load_eval_set(dir / "pools"), dir / "report");
    dirs.push_back(dir / "report");
  }
  int files = 0;
  int differing = 0;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    const auto ext = e.path().extension();
    if (ext != ".csv" && ext != ".json") continue;
    ++files;
    differing += slurp(e.path()) != slurp(dirs[1] / e.path().filename());
  }
  verdict("10", files > 0 && differing == 0,
          fmt("two end-to-end report runs (jobs 1 vs 3): %d CSV/JSON files, %d differ", files,
              differing));
}

// --- 11 -----------------------------------------------------------------

void golden_files() {
  const fs::path data = SMCE_TEST_DATA;
  const auto images = load_cifar10_batch(data / "cifar_two_records.bin");
  bool cifar_ok = images.size() == 2 && images[0].label == 3 && images[1].label == 9;
  for (int i = 0; cifar_ok && i < 3072; ++i) {
    cifar_ok = images[0].data[i] == static_cast<float>((i * 7) % 256) / 255.0f;
    const float want[3] = {1.0f, 0.0f, 128.0f / 255.0f};
    cifar_ok = cifar_ok && images[1].data[i] == want[i / 1024];
  }
  EntropyFieldMap map;
  map.rows = 2;
  map.cols = 2;
  map.cells = {0.0, 1.0, 4.0 / 3.0, 2.0};
  map.max_entropy = 2.0;
  const std::string golden = slurp(data / "mefm_2x2.ppm");
  const auto rendered = render_mefm_ppm(map, 2);
  const bool ppm_ok = std::string(rendered.begin(), rendered.end()) == golden;
  verdict("11", cifar_ok && ppm_ok,
          fmt("CIFAR-10 two-record fixture decode %s; field-map PPM fixture %s (%zu bytes)",
              cifar_ok ? "exact" : "MISMATCH", ppm_ok ? "byte-exact" : "MISMATCH", golden.size()));
}

int summary() {
  std::printf("\nsummary: %d pass, %d fail, %d expected red, %d blocked\n", tally.pass, tally.fail,
              tally.expected_red, tally.blocked);
  return tally.fail == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  const char* cifar_dir = std::getenv("SMCE_CIFAR10_DIR");
  const bool have_cifar = cifar_dir != nullptr && *cifar_dir != '\0';
  try {
    if (argc > 1 && std::strcmp(argv[1], "--cifar10-only") == 0) {
      if (!have_cifar) {
        blocked("5", "separation of FGSM vs clean SMCE");
        blocked("6", "best-threshold detection accuracy");
        blocked("9", "accuracy-correlation trend");
        return 77;
      }
      cifar_criteria(cifar_dir);
      return summary();
    }
    entropy_bounds();
    gradients();
    oracle_equivalence();
    attack_contracts();
    if (have_cifar) cifar_criteria(cifar_dir);
    surrogate_and_mask_sizes(have_cifar);
    metrics_fidelity();
    determinism();
    golden_files();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  return summary();
}
