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

// Experiment orchestration shared by the CLI and the acceptance binary:
// prepared splits, resumable run directories, model pipelines (J-MWR pulls in
// its three sub-models), and the table/figure studies built on top of them.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scmwr/checkpoint.h"
#include "scmwr/data.h"
#include "scmwr/meta.h"
#include "scmwr/metrics.h"
#include "scmwr/train.h"

namespace scmwr {

inline constexpr std::uint64_t kSplitSeed = 42;
inline constexpr std::size_t kDeskScaleCases = 2000;

using Log = std::function<void(const std::string&)>;

// ---- data ------------------------------------------------------------------

struct DataBundle {
  Dataset train, val, test;  // raw exams; train may be a class-stratified subset
  NormStats stats;           // fitted on `train`
  LabeledFeatures train_set, val_set, test_set;
  std::string data_hash;  // of the full dataset's CSV text
};

// Stratified split, optional training subset (fraction < 1 keeps
// round(fraction n_c) per class, drawn with `subset_seed`), normalization fit
// on the training part. Fraction 1 leaves the split untouched.
DataBundle make_data_bundle(std::span<const MwrExam> data, double fraction = 1.0,
                            std::uint64_t subset_seed = 1, std::uint64_t split_seed = kSplitSeed);

// Default desk-scale synthetic data: n cases from generator seed `seed`.
Dataset default_synthetic(std::size_t n_cases = kDeskScaleCases, std::uint64_t seed = 1);

// ---- single runs -------------------------------------------------------------

struct RunConfig {
  TrainConfig train;
  double fraction = 1.0;
  std::uint64_t split_seed = kSplitSeed;
  std::string data;  // provenance: CSV path or generator description
  // J-MWR only: checkpoints of the pre-trained local, regional, global models.
  std::array<std::string, 3> sub_checkpoints;
};

// Flat document: every TrainConfig key plus fraction, split_seed, data and
// local/regional/global_checkpoint. Unknown keys are a ConfigError.
nlohmann::json run_config_to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j, ModelKind fallback_kind);

// First 16 hex digits of SHA-256 over the canonical config dump plus the
// data hash.
std::string config_hash(const RunConfig& c, const std::string& data_hash);

struct RunOutcome {
  std::filesystem::path dir;
  Checkpoint checkpoint;
  RunMetrics metrics;
  ConfusionMatrix confusion;
  bool resumed = false;
};

inline constexpr const char* kCheckpointFile = "checkpoint.json";

// Trains into `dir` (config.json, checkpoint.json, history.csv, metrics.json)
// and evaluates the best checkpoint on the test split. A directory whose
// metrics.json carries the same config hash is reused without retraining.
// Throws ConfigError for missing/mismatched sub-model checkpoints and
// NumericError when training diverges (history.csv is still written).
RunOutcome run_single(const DataBundle& data, const RunConfig& config,
                      const std::filesystem::path& dir, const Log& log = nullptr);

// Reloads a finished run directory; nullopt when it is absent or stale.
std::optional<RunOutcome> load_run(const std::filesystem::path& dir, const std::string& hash);

// ---- pipelines -------------------------------------------------------------------

struct PipelineConfig {
  TrainConfig base;  // shared settings; kind is ignored
  double fraction = 1.0;
  // J-MWR fine-tuning rates and epoch cap (0 = base.max_epochs).
  double joint_lr = kFineTuneLr;
  double joint_head_lr = kJointHeadLr;
  std::size_t joint_epochs = 0;
  std::string data;
};

// Trains `kind` under root/<kind>. For J-MWR the three sub-models are trained
// first (root/lmwr, root/rmwr, root/gmwr, all resumable) and fine-tuned
// jointly without the batch-wise term.
RunOutcome run_pipeline(const DataBundle& data, ModelKind kind, const PipelineConfig& config,
                        const std::filesystem::path& root, const Log& log = nullptr);

// ---- studies ------------------------------------------------------------------------

struct StudyConfig {
  PipelineConfig pipeline;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<ModelKind> models{std::begin(kAllModelKinds), std::end(kAllModelKinds)};
};

// Each returns CSV text. Runs live under `root`; cells already on disk are
// reused.

// model,mcc,accuracy,roc_auc (formatted m ± s), then numeric mean/std columns.
std::string table_models(std::span<const MwrExam> data, const StudyConfig& cfg,
                         const std::filesystem::path& root, const Log& log = nullptr);

// Same columns with a loss column after model; one row per (model, loss).
std::string table_losses(std::span<const MwrExam> data, const StudyConfig& cfg,
                         const std::filesystem::path& root, const Log& log = nullptr);

inline constexpr double kFractionGrid[] = {0.25, 0.5, 0.75, 1.0};
inline constexpr std::size_t kBatchGrid[] = {1, 2, 4, 8, 16, 32, 64, 128};

// model,fraction,... and model,batch_size,... rows.
std::string fraction_sweep(std::span<const MwrExam> data, const StudyConfig& cfg,
                           const std::filesystem::path& root, const Log& log = nullptr);
std::string batch_sweep(std::span<const MwrExam> data, const StudyConfig& cfg,
                        const std::filesystem::path& root, const Log& log = nullptr);

// One CSV per augmentation kind over its default grid, frozen models from the
// plain runs: model,magnitude, then the table_models metric columns.
std::map<AugmentKind, std::string> robustness_study(std::span<const MwrExam> data,
                                                    const StudyConfig& cfg,
                                                    const std::filesystem::path& root,
                                                    const Log& log = nullptr);

// Per-seed sub-model scores and every combiner's test score.
struct EnsembleSeed {
  std::uint64_t seed = 0;
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<SubScores> sub_scores;                     // test split
  std::map<std::string, std::vector<double>> scores;     // method -> test scores
  std::string joint_checkpoint;
};

// The five meta strategies fitted on training-split sub-scores, plus J-MWR.
EnsembleSeed ensemble_for_seed(const DataBundle& data, const RunOutcome& local,
                               const RunOutcome& regional, const RunOutcome& global,
                               const RunOutcome& joint);

// method,mcc,mcc_mean,mcc_std,checkpoint with 6 rows in a fixed order.
// Only the jmwr row names checkpoints (';'-joined).
std::string ensemble_table(std::span<const EnsembleSeed> seeds);
// id,label,s_local,s_regional,s_global,<method scores...>
std::string ensemble_scores_csv(const EnsembleSeed& seed);

std::string ensemble_study(std::span<const MwrExam> data, const StudyConfig& cfg,
                           const std::filesystem::path& root, const Log& log = nullptr);

// embeddings.csv (id,label,correct,e0..) and stats for one checkpoint.
struct EmbeddingExport {
  std::string csv;
  nlohmann::json stats;
  ConfusionMatrix confusion;
};
EmbeddingExport export_embeddings(const Checkpoint& ckpt, std::span<const MwrExam> exams);

// Full protocol: tables, sweeps, robustness, ensemble, summary.md, all under
// `out`. Resumable.
struct ReproduceConfig {
  std::size_t n_cases = kDeskScaleCases;
  std::uint64_t data_seed = 1;
  StudyConfig study;
};
void reproduce_all(const ReproduceConfig& cfg, const std::filesystem::path& out,
                   const Log& log = nullptr);

}  // namespace scmwr
