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

#include "scmwr/train.h"

#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scmwr/errors.h"
#include "scmwr/io.h"
#include "scmwr/optim.h"

namespace scmwr {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid train config: " + what); };
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail("lr must be a finite value >= 0");
  if (!(head_lr >= 0.0) || !std::isfinite(head_lr)) fail("head_lr must be a finite value >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (max_epochs < 1) fail("max_epochs must be >= 1");
  if (early_stop_patience < 1) fail("early_stop_patience must be >= 1");
  if (!(plateau_factor > 0.0 && plateau_factor <= 1.0)) fail("plateau_factor must lie in (0, 1]");
  if (plateau_patience < 1) fail("plateau_patience must be >= 1");
  if (!(min_lr >= 0.0)) fail("min_lr must be >= 0");
  if (!(contrastive_weight >= 0.0) || !std::isfinite(contrastive_weight)) {
    fail("contrastive_weight must be a finite value >= 0");
  }
  if (!(margin > 0.0)) fail("margin must be positive");
  if (!(gate.steepness > 0.0)) fail("gate_steepness must be positive");
}

TrainConfig default_train_config(ModelKind kind) {
  TrainConfig c;
  c.kind = kind;
  if (kind == ModelKind::kJoint) c.lr = kFineTuneLr;
  return c;
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"model", to_string(c.kind)},
                     {"lr", c.lr},
                     {"head_lr", c.head_lr},
                     {"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"epsilon", c.epsilon},
                     {"batch_size", c.batch_size},
                     {"max_epochs", c.max_epochs},
                     {"early_stop_patience", c.early_stop_patience},
                     {"plateau_factor", c.plateau_factor},
                     {"plateau_patience", c.plateau_patience},
                     {"min_lr", c.min_lr},
                     {"seed", c.seed},
                     {"contrastive", to_string(c.contrastive)},
                     {"contrastive_weight", c.contrastive_weight},
                     {"margin", c.margin},
                     {"gate_mode", c.gate.mode == ad::GateMode::kSoft ? "soft" : "hard"},
                     {"gate_steepness", c.gate.steepness}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  static const std::set<std::string, std::less<>> known = {
      "model", "lr", "head_lr", "beta1", "beta2", "epsilon", "batch_size", "max_epochs",
      "early_stop_patience", "plateau_factor", "plateau_patience", "min_lr", "seed",
      "contrastive", "contrastive_weight", "margin", "gate_mode", "gate_steepness"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown train config key '" + key + "'");
  }
  try {
    const ModelKind kind =
        j.contains("model") ? parse_model_kind(j.at("model").get<std::string>()) : c.kind;
    TrainConfig d = default_train_config(kind);
    d.lr = j.value("lr", d.lr);
    d.head_lr = j.value("head_lr", d.head_lr);
    d.beta1 = j.value("beta1", d.beta1);
    d.beta2 = j.value("beta2", d.beta2);
    d.epsilon = j.value("epsilon", d.epsilon);
    d.batch_size = j.value("batch_size", d.batch_size);
    d.max_epochs = j.value("max_epochs", d.max_epochs);
    d.early_stop_patience = j.value("early_stop_patience", d.early_stop_patience);
    d.plateau_factor = j.value("plateau_factor", d.plateau_factor);
    d.plateau_patience = j.value("plateau_patience", d.plateau_patience);
    d.min_lr = j.value("min_lr", d.min_lr);
    d.seed = j.value("seed", d.seed);
    if (j.contains("contrastive")) {
      d.contrastive = parse_contrastive_kind(j.at("contrastive").get<std::string>());
    }
    d.contrastive_weight = j.value("contrastive_weight", d.contrastive_weight);
    d.margin = j.value("margin", d.margin);
    if (j.contains("gate_mode")) {
      const std::string mode = j.at("gate_mode").get<std::string>();
      if (mode != "soft" && mode != "hard") {
        throw ConfigError("gate_mode must be soft or hard, got '" + mode + "'");
      }
      d.gate.mode = mode == "soft" ? ad::GateMode::kSoft : ad::GateMode::kHard;
    }
    d.gate.steepness = j.value("gate_steepness", d.gate.steepness);
    c = d;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad train config value: ") + e.what());
  }
}

LabeledFeatures prepare(std::span<const MwrExam> exams, const NormStats& stats) {
  LabeledFeatures out;
  out.features = normalize_all(exams, stats);
  out.labels.reserve(exams.size());
  for (const MwrExam& e : exams) out.labels.push_back(e.label);
  return out;
}

std::string TrainHistory::to_csv() const {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss,lr,seconds\n";
  for (const EpochRecord& r : epochs) {
    os << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss)
       << ',' << format_double(r.lr) << ',' << format_double(r.seconds) << '\n';
  }
  return os.str();
}

namespace {

ClassWeights weights_for(std::span<const int> labels) {
  const std::size_t pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  return class_weights(labels.size() - pos, pos);
}

}  // namespace

TrainResult train(ModelBundle model, const LabeledFeatures& train_set,
                  const LabeledFeatures& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (model.kind != config.kind) {
    throw std::invalid_argument("train: model is " + std::string(to_string(model.kind)) +
                                " but config is " + std::string(to_string(config.kind)));
  }
  if (train_set.size() == 0 || val_set.size() == 0) {
    throw std::invalid_argument("train: empty train or validation split");
  }
  model.gate = config.gate;
  const ClassWeights weights = weights_for(train_set.labels);
  const bool joint = model.kind == ModelKind::kJoint;
  // Batch-wise losses attach to sub-model pre-training only.
  const bool use_contrastive = !joint && config.contrastive != ContrastiveKind::kNone &&
                               config.contrastive_weight > 0.0;
  LrScale lr_scale;
  if (joint) {
    const double ratio = config.lr > 0.0 ? config.head_lr / config.lr : 0.0;
    lr_scale = [ratio](std::string_view name) { return is_joint_head_param(name) ? ratio : 1.0; };
  }

  AdamState adam;
  adam.lr = config.lr;
  adam.beta1 = config.beta1;
  adam.beta2 = config.beta2;
  adam.epsilon = config.epsilon;
  PlateauScheduler plateau;
  plateau.factor = config.plateau_factor;
  plateau.patience = config.plateau_patience;
  plateau.min_lr = config.min_lr;

  TrainResult result;
  result.model = model;
  result.best_val_loss = std::numeric_limits<double>::infinity();

  Rng shuffle_rng = Rng(config.seed).split(1);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Features> batch_x;
  std::vector<int> batch_y;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    try {
      for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
        const std::size_t n = std::min(config.batch_size, order.size() - b);
        batch_x.clear();
        batch_y.clear();
        for (std::size_t i = b; i < b + n; ++i) {
          batch_x.push_back(train_set.features[order[i]]);
          batch_y.push_back(train_set.labels[order[i]]);
        }
        ad::Tape tape;
        ParamBinder binder(tape, model.params);
        const ModelInputs in = build_inputs(model.kind, batch_x);
        const ModelOutput out = forward(binder, model.kind, in, model.gate);
        ad::Tensor loss = clamped_bce(out.score, batch_y, weights);
        if (use_contrastive && n >= 2) {
          loss = ad::add(loss, ad::scale(contrastive_loss(config.contrastive, out.embedding,
                                                          batch_y, config.margin),
                                         config.contrastive_weight));
        }
        const double value = loss.item();
        if (!std::isfinite(value)) throw NumericError("non-finite training loss");
        tape.backward(loss);
        GradMap grads;
        for (const auto& [name, leaf] : binder.bound()) grads.emplace(name, leaf.grad());
        adam_step(adam, model.params, grads, lr_scale);
        loss_sum += value;
        ++batches;
      }
    } catch (const NumericError& e) {
      result.aborted = true;
      result.abort_reason = "epoch " + std::to_string(epoch) + ": " + e.what();
      return result;
    }

    const Predictions val = predict(model, val_set.features);
    const double val_loss = class_balanced_bce_value(val.scores, val_set.labels, weights);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.val_loss = val_loss;
    rec.lr = adam.lr;
    if (!std::isfinite(val_loss) || !std::isfinite(rec.train_loss)) {
      result.aborted = true;
      result.abort_reason = "epoch " + std::to_string(epoch) + ": non-finite loss";
      return result;
    }
    adam.lr = plateau.update(val_loss, adam.lr);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= config.early_stop_patience) {
      break;
    }
  }
  return result;
}

}  // namespace scmwr
