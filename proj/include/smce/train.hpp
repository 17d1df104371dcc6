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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smce/dataset.hpp"
#include "smce/network.hpp"

namespace smce {

struct TrainParams {
  int epochs = 10;
  int batch_size = 32;
  float learning_rate = 0.01f;
  float momentum = 0.9f;
  std::uint64_t seed = 1;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;  // percent, running over the epoch
  double val_accuracy = 0.0;    // percent; 0 when no validation set
};

struct TrainResult {
  Classifier model;
  std::vector<EpochStats> history;
};

// Called after each epoch; returning false stops training early.
using EpochCallback = std::function<bool(const EpochStats&, const Classifier&)>;

/// Mini-batch SGD with momentum on cross-entropy. Sample order is shuffled
/// per epoch from `params.seed`, so a fixed seed gives bit-identical weights.
/// Throws NumericError if the loss becomes non-finite.
TrainResult train(Classifier model, const LabeledDataset& train_set, const LabeledDataset& val_set,
                  const TrainParams& params, const EpochCallback& on_epoch = {});

// Top-1 accuracy in percent.
double accuracy(const Classifier& model, const LabeledDataset& data, int jobs = 1);

}  // namespace smce
