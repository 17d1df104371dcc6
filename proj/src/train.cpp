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

#include "smce/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "smce/error.hpp"
#include "smce/parallel.hpp"

namespace smce {

double accuracy(const Classifier& model, const LabeledDataset& data, int jobs) {
  if (data.images.empty()) return 0.0;
  std::vector<char> correct(data.images.size(), 0);
  parallel_for(data.images.size(), jobs, [&](std::size_t i) {
    const auto& img = data.images[i];
    correct[i] = img.label && model.predict_label(img) == *img.label;
  });
  const auto hits = std::count(correct.begin(), correct.end(), 1);
  return 100.0 * static_cast<double>(hits) / static_cast<double>(data.images.size());
}

TrainResult train(Classifier model, const LabeledDataset& train_set, const LabeledDataset& val_set,
                  const TrainParams& params, const EpochCallback& on_epoch) {
  if (train_set.images.empty()) throw InputError("train: empty training set");
  if (params.epochs < 0 || params.batch_size < 1) {
    throw InputError("train: epochs must be >= 0 and batch size >= 1");
  }
  for (const auto& img : train_set.images) {
    if (!img.label) throw InputError("train: unlabelled training image");
  }

  const std::size_t n = train_set.images.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed);

  const std::size_t count = model.parameters().size();
  std::vector<float> grad(count);
  std::vector<float> velocity(count, 0.0f);
  TrainResult result{model, {}};
  Classifier& net = result.model;

  for (int epoch = 1; epoch <= params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t start = 0; start < n; start += params.batch_size) {
      const std::size_t stop = std::min(n, start + params.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0f);
      for (std::size_t i = start; i < stop; ++i) {
        const auto& img = train_set.images[order[i]];
        const auto [loss, predicted] = net.accumulate_parameter_gradient(img, *img.label, grad);
        hits += predicted == *img.label;
        if (!std::isfinite(loss)) {
          throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                             ", sample " + std::to_string(order[i]));
        }
        loss_sum += loss;
      }
      const float scale = 1.0f / static_cast<float>(stop - start);
      auto weights = net.parameters();
      for (std::size_t j = 0; j < count; ++j) {
        const float g = grad[j] * scale;
        if (!std::isfinite(g)) {
          throw NumericError("train: non-finite gradient at epoch " + std::to_string(epoch));
        }
        velocity[j] = params.momentum * velocity[j] - params.learning_rate * g;
        weights[j] += velocity[j];
      }
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(n);
    stats.train_accuracy = 100.0 * static_cast<double>(hits) / static_cast<double>(n);
    stats.val_accuracy = val_set.images.empty() ? 0.0 : accuracy(net, val_set);
    result.history.push_back(stats);
    if (on_epoch && !on_epoch(stats, net)) break;
  }
  return result;
}

}  // namespace smce
