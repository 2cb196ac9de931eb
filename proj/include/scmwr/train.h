// Copyright 2026 The scmwr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Training loop: seeded shuffling, mini-batches, clamped class-balanced BCE
// plus an optional weighted contrastive term on the embedding hook, Adam,
// plateau schedule, best-validation checkpoint and early stopping.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scmwr/data.h"
#include "scmwr/losses.h"
#include "scmwr/model.h"

namespace scmwr {

inline constexpr double kDefaultLr = 1e-4;
inline constexpr double kFineTuneLr = 1e-7;
inline constexpr double kJointHeadLr = 1e-2;

struct TrainConfig {
  ModelKind kind = ModelKind::kBase;
  double lr = kDefaultLr;
  // J-MWR only: rate for the weighting layers and final head. Sub-model
  // parameters train at `lr`.
  double head_lr = kJointHeadLr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 4;
  std::size_t max_epochs = 150;
  std::size_t early_stop_patience = 15;
  double plateau_factor = 0.1;
  std::size_t plateau_patience = 5;
  double min_lr = 1e-12;
  std::uint64_t seed = 1;
  ContrastiveKind contrastive = ContrastiveKind::kNone;
  double contrastive_weight = 0.1;
  double margin = 1.0;
  GateConfig gate;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Defaults for `kind`: lr 1e-4, or the fine-tune rate 1e-7 for J-MWR.
TrainConfig default_train_config(ModelKind kind);

void to_json(nlohmann::json& j, const TrainConfig& c);
// Missing keys keep their defaults for c.kind (read first); unknown keys are
// a ConfigError.
void from_json(const nlohmann::json& j, TrainConfig& c);

struct LabeledFeatures {
  std::vector<Features> features;  // normalized
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

LabeledFeatures prepare(std::span<const MwrExam> exams, const NormStats& stats);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  // epoch,train_loss,val_loss,lr,seconds
  std::string to_csv() const;
};

struct TrainResult {
  ModelBundle model;  // parameters from the best validation epoch
  TrainHistory history;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Throws std::invalid_argument on empty splits or a model/config kind
// mismatch. A non-finite loss or gradient stops the run with aborted = true
// and the history so far.
TrainResult train(ModelBundle model, const LabeledFeatures& train_set,
                  const LabeledFeatures& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = nullptr);

}  // namespace scmwr
