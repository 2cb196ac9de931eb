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

#include "scmwr/experiment.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scmwr/errors.h"
#include "scmwr/io.h"
#include "scmwr/robustness.h"

namespace scmwr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void say(const Log& log, const std::string& msg) {
  if (log) log(msg);
}

std::string seed_dir(std::uint64_t seed) { return "s" + std::to_string(seed); }

json confusion_json(const ConfusionMatrix& c) {
  return {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}};
}

// Rows of per-seed metrics keyed by leading label columns.
struct MetricTable {
  std::vector<std::string> key_names;
  std::vector<std::pair<std::vector<std::string>, std::vector<RunMetrics>>> rows;

  void add(std::vector<std::string> keys, std::vector<RunMetrics> runs) {
    rows.emplace_back(std::move(keys), std::move(runs));
  }

  static std::array<MeanStd, 3> stats(const std::vector<RunMetrics>& runs) {
    std::vector<double> m, a, r;
    for (const RunMetrics& x : runs) {
      m.push_back(x.mcc);
      a.push_back(x.accuracy);
      r.push_back(x.roc_auc);
    }
    return {mean_std(m), mean_std(a), mean_std(r)};
  }

  std::string csv() const {
    std::ostringstream os;
    for (const std::string& k : key_names) os << k << ',';
    os << "mcc,accuracy,roc_auc,mcc_mean,mcc_std,accuracy_mean,accuracy_std,roc_auc_mean,"
          "roc_auc_std\n";
    for (const auto& [keys, runs] : rows) {
      for (const std::string& k : keys) os << k << ',';
      const auto s = stats(runs);
      os << s[0].format() << ',' << s[1].format() << ',' << s[2].format();
      for (const MeanStd& x : s) os << ',' << format_double(x.mean) << ',' << format_double(x.std);
      os << '\n';
    }
    return os.str();
  }

  std::string markdown() const {
    std::ostringstream os;
    os << '|';
    for (const std::string& k : key_names) os << ' ' << k << " |";
    os << " MCC | Accuracy | ROC AUC |\n|";
    for (std::size_t i = 0; i < key_names.size() + 3; ++i) os << "---|";
    os << '\n';
    for (const auto& [keys, runs] : rows) {
      os << '|';
      for (const std::string& k : keys) os << ' ' << k << " |";
      const auto s = stats(runs);
      os << ' ' << s[0].format() << " | " << s[1].format() << " | " << s[2].format() << " |\n";
    }
    return os.str();
  }
};

PipelineConfig seeded(const StudyConfig& cfg, std::uint64_t seed) {
  PipelineConfig p = cfg.pipeline;
  p.base.seed = seed;
  return p;
}

fs::path plain_dir(const fs::path& root, std::uint64_t seed) {
  return root / "plain" / seed_dir(seed);
}

MetricTable models_table(std::span<const MwrExam> data, const StudyConfig& cfg,
                         const fs::path& root, const Log& log) {
  const DataBundle bundle = make_data_bundle(data);
  std::map<ModelKind, std::vector<RunMetrics>> cells;
  for (std::uint64_t seed : cfg.seeds) {
    for (ModelKind k : cfg.models) {
      cells[k].push_back(
          run_pipeline(bundle, k, seeded(cfg, seed), plain_dir(root, seed), log).metrics);
    }
  }
  MetricTable t{{"model"}, {}};
  for (ModelKind k : cfg.models) t.add({std::string(display_name(k))}, cells[k]);
  return t;
}

inline constexpr ContrastiveKind kTableLosses[] = {
    ContrastiveKind::kContrastive, ContrastiveKind::kNPairs, ContrastiveKind::kTripletHard,
    ContrastiveKind::kTripletSemiHard};

MetricTable losses_table(std::span<const MwrExam> data, const StudyConfig& cfg,
                         const fs::path& root, const Log& log) {
  const DataBundle bundle = make_data_bundle(data);
  std::map<std::pair<ModelKind, ContrastiveKind>, std::vector<RunMetrics>> cells;
  for (ContrastiveKind loss : kTableLosses) {
    for (std::uint64_t seed : cfg.seeds) {
      PipelineConfig p = seeded(cfg, seed);
      p.base.contrastive = loss;
      for (ModelKind k : cfg.models) {
        const fs::path dir = root / std::string(to_string(loss)) / seed_dir(seed);
        cells[{k, loss}].push_back(run_pipeline(bundle, k, p, dir, log).metrics);
      }
    }
  }
  MetricTable t{{"model", "loss"}, {}};
  for (ModelKind k : cfg.models) {
    for (ContrastiveKind loss : kTableLosses) {
      t.add({std::string(display_name(k)), std::string(to_string(loss))}, cells[{k, loss}]);
    }
  }
  return t;
}

std::string percent(double f) { return std::to_string(static_cast<int>(std::lround(f * 100))); }

MetricTable fraction_table(std::span<const MwrExam> data, const StudyConfig& cfg,
                           const fs::path& root, const Log& log) {
  const DataBundle full = make_data_bundle(data);
  std::map<std::pair<ModelKind, double>, std::vector<RunMetrics>> cells;
  for (double f : kFractionGrid) {
    for (std::uint64_t seed : cfg.seeds) {
      PipelineConfig p = seeded(cfg, seed);
      p.fraction = f;
      const bool whole = f == 1.0;
      const DataBundle subset = whole ? DataBundle{} : make_data_bundle(data, f, seed);
      const DataBundle& b = whole ? full : subset;
      const fs::path dir =
          whole ? plain_dir(root, seed) : root / ("fraction_" + percent(f)) / seed_dir(seed);
      for (ModelKind k : cfg.models) cells[{k, f}].push_back(run_pipeline(b, k, p, dir, log).metrics);
    }
  }
  MetricTable t{{"model", "fraction"}, {}};
  for (ModelKind k : cfg.models) {
    for (double f : kFractionGrid) t.add({std::string(display_name(k)), format_double(f)}, cells[{k, f}]);
  }
  return t;
}

MetricTable batch_table(std::span<const MwrExam> data, const StudyConfig& cfg,
                        const fs::path& root, const Log& log) {
  const DataBundle bundle = make_data_bundle(data);
  std::map<std::pair<ModelKind, std::size_t>, std::vector<RunMetrics>> cells;
  for (std::size_t b : kBatchGrid) {
    for (std::uint64_t seed : cfg.seeds) {
      PipelineConfig p = seeded(cfg, seed);
      p.base.batch_size = b;
      const fs::path dir = b == cfg.pipeline.base.batch_size
                               ? plain_dir(root, seed)
                               : root / ("batch_" + std::to_string(b)) / seed_dir(seed);
      for (ModelKind k : cfg.models) cells[{k, b}].push_back(run_pipeline(bundle, k, p, dir, log).metrics);
    }
  }
  MetricTable t{{"model", "batch_size"}, {}};
  for (ModelKind k : cfg.models) {
    for (std::size_t b : kBatchGrid) t.add({std::string(display_name(k)), std::to_string(b)}, cells[{k, b}]);
  }
  return t;
}

inline constexpr AugmentKind kAugmentKinds[] = {AugmentKind::kGaussianNoise,
                                                AugmentKind::kPointDropout,
                                                AugmentKind::kGlobalShift, AugmentKind::kRotation};

std::map<AugmentKind, MetricTable> robustness_tables(std::span<const MwrExam> data,
                                                     const StudyConfig& cfg, const fs::path& root,
                                                     const Log& log) {
  const DataBundle bundle = make_data_bundle(data);
  // kind -> model -> grid index -> per-seed metrics
  std::map<AugmentKind, std::map<ModelKind, std::vector<std::vector<RunMetrics>>>> cells;
  for (std::uint64_t seed : cfg.seeds) {
    for (ModelKind k : cfg.models) {
      const RunOutcome run = run_pipeline(bundle, k, seeded(cfg, seed), plain_dir(root, seed), log);
      for (AugmentKind a : kAugmentKinds) {
        const std::vector<double> grid = default_grid(a);
        const auto pts = robustness_sweep(run.checkpoint.model, bundle.test, bundle.stats, a, grid, seed);
        auto& cell = cells[a][k];
        cell.resize(grid.size());
        for (std::size_t i = 0; i < pts.size(); ++i) cell[i].push_back(pts[i].metrics);
      }
      say(log, "robustness " + std::string(to_string(k)) + " " + seed_dir(seed) + " done");
    }
  }
  std::map<AugmentKind, MetricTable> out;
  for (AugmentKind a : kAugmentKinds) {
    MetricTable t{{"model", "magnitude"}, {}};
    const std::vector<double> grid = default_grid(a);
    for (ModelKind k : cfg.models) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        t.add({std::string(display_name(k)), format_double(grid[i])}, cells[a][k][i]);
      }
    }
    out.emplace(a, std::move(t));
  }
  return out;
}

std::vector<EnsembleSeed> ensemble_seeds(std::span<const MwrExam> data, const StudyConfig& cfg,
                                         const fs::path& root, const Log& log) {
  const DataBundle bundle = make_data_bundle(data);
  std::vector<EnsembleSeed> out;
  for (std::uint64_t seed : cfg.seeds) {
    const PipelineConfig p = seeded(cfg, seed);
    const fs::path dir = plain_dir(root, seed);
    const RunOutcome j = run_pipeline(bundle, ModelKind::kJoint, p, dir, log);
    const RunOutcome l = run_pipeline(bundle, ModelKind::kLocal, p, dir, log);
    const RunOutcome r = run_pipeline(bundle, ModelKind::kRegional, p, dir, log);
    const RunOutcome g = run_pipeline(bundle, ModelKind::kGlobal, p, dir, log);
    EnsembleSeed e = ensemble_for_seed(bundle, l, r, g, j);
    e.seed = seed;
    e.joint_checkpoint =
        (j.dir / kCheckpointFile).lexically_relative(root.parent_path()).generic_string();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

// ---- data ------------------------------------------------------------------------

DataBundle make_data_bundle(std::span<const MwrExam> data, double fraction,
                            std::uint64_t subset_seed, std::uint64_t split_seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("fraction must lie in (0, 1], got " + format_double(fraction));
  }
  DataBundle b;
  Splits s = stratified_split(data, split_seed);
  b.train = fraction < 1.0 ? subsample_fraction(s.train, fraction, subset_seed) : std::move(s.train);
  b.val = std::move(s.val);
  b.test = std::move(s.test);
  b.stats = fit_normalization(b.train);
  b.train_set = prepare(b.train, b.stats);
  b.val_set = prepare(b.val, b.stats);
  b.test_set = prepare(b.test, b.stats);
  std::ostringstream os;
  write_csv(data, os);
  b.data_hash = sha256_hex(os.str());
  return b;
}

Dataset default_synthetic(std::size_t n_cases, std::uint64_t seed) {
  GeneratorConfig g;
  g.n_cases = n_cases;
  g.seed = seed;
  return generate_synthetic(g);
}

// ---- run configs ---------------------------------------------------------------------

namespace {
inline constexpr const char* kSubKeys[] = {"local_checkpoint", "regional_checkpoint",
                                           "global_checkpoint"};
}

json run_config_to_json(const RunConfig& c) {
  json j = c.train;
  j["fraction"] = c.fraction;
  j["split_seed"] = c.split_seed;
  j["data"] = c.data;
  if (c.train.kind == ModelKind::kJoint) {
    for (std::size_t i = 0; i < 3; ++i) j[kSubKeys[i]] = c.sub_checkpoints[i];
  }
  return j;
}

RunConfig run_config_from_json(const json& j, ModelKind fallback_kind) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig c;
  json train = j;
  try {
    if (j.contains("fraction")) c.fraction = j.at("fraction").get<double>();
    if (j.contains("split_seed")) c.split_seed = j.at("split_seed").get<std::uint64_t>();
    if (j.contains("data")) c.data = j.at("data").get<std::string>();
    for (std::size_t i = 0; i < 3; ++i) {
      if (j.contains(kSubKeys[i])) c.sub_checkpoints[i] = j.at(kSubKeys[i]).get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad run config value: ") + e.what());
  }
  for (const char* k : {"fraction", "split_seed", "data"}) train.erase(k);
  for (const char* k : kSubKeys) train.erase(k);
  c.train.kind = fallback_kind;
  from_json(train, c.train);
  if (!(c.fraction > 0.0 && c.fraction <= 1.0)) {
    throw ConfigError("fraction must lie in (0, 1], got " + format_double(c.fraction));
  }
  return c;
}

std::string config_hash(const RunConfig& c, const std::string& data_hash) {
  json j = run_config_to_json(c);
  j.erase("data");  // provenance only; the content hash below is what matters
  return sha256_hex(j.dump() + "|" + data_hash).substr(0, 16);
}

// ---- single runs ------------------------------------------------------------------------

std::optional<RunOutcome> load_run(const fs::path& dir, const std::string& hash) {
  const fs::path metrics_path = dir / "metrics.json";
  if (!fs::exists(metrics_path)) return std::nullopt;
  try {
    const json m = json::parse(read_file(metrics_path));
    if (m.value("config_hash", std::string()) != hash) return std::nullopt;
    RunOutcome r;
    r.dir = dir;
    r.checkpoint = load_checkpoint(dir / kCheckpointFile);
    r.metrics = {m.at("mcc").get<double>(), m.at("accuracy").get<double>(),
                 m.at("roc_auc").get<double>()};
    const json& c = m.at("confusion");
    r.confusion.tp = c.at("tp").get<std::size_t>();
    r.confusion.tn = c.at("tn").get<std::size_t>();
    r.confusion.fp = c.at("fp").get<std::size_t>();
    r.confusion.fn = c.at("fn").get<std::size_t>();
    r.resumed = true;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable leftovers are retrained
  }
}

RunOutcome run_single(const DataBundle& data, const RunConfig& config, const fs::path& dir,
                      const Log& log) {
  config.train.validate();
  const ModelKind kind = config.train.kind;
  const std::string hash = config_hash(config, data.data_hash);
  const std::string tag = std::string(to_string(kind)) + " " + dir.string();
  if (auto done = load_run(dir, hash)) {
    say(log, "reuse " + tag);
    return *std::move(done);
  }

  ModelBundle model;
  if (kind == ModelKind::kJoint) {
    static constexpr ModelKind kSubKinds[] = {ModelKind::kLocal, ModelKind::kRegional,
                                              ModelKind::kGlobal};
    std::array<ModelBundle, 3> subs;
    for (std::size_t i = 0; i < 3; ++i) {
      const std::string& path = config.sub_checkpoints[i];
      if (path.empty()) {
        throw ConfigError("J-MWR needs a " + std::string(display_name(kSubKinds[i])) +
                          " checkpoint (" + kSubKeys[i] + ")");
      }
      Checkpoint c = load_checkpoint(path, kSubKinds[i]);
      if (c.norm.mean != data.stats.mean || c.norm.std != data.stats.std) {
        throw ConfigError(path + ": sub-model was trained on a different split or normalization");
      }
      subs[i] = std::move(c.model);
    }
    model = make_joint(subs[0], subs[1], subs[2], config.train.seed);
  } else {
    model = make_model(kind, config.train.seed);
  }

  const json cfg_json = run_config_to_json(config);
  write_file_atomic(dir / "config.json", cfg_json.dump(2) + "\n");
  say(log, "train " + tag);
  const EpochCallback on_epoch = [&](const EpochRecord& r) {
    say(log, "  " + std::string(to_string(kind)) + " epoch " + std::to_string(r.epoch) +
                 " train " + format_double(r.train_loss) + " val " + format_double(r.val_loss) +
                 " lr " + format_double(r.lr));
  };
  const TrainResult result = train(std::move(model), data.train_set, data.val_set, config.train,
                                   log ? on_epoch : EpochCallback{});
  write_file_atomic(dir / "history.csv", result.history.to_csv());
  if (result.aborted) throw NumericError(tag + ": training diverged at " + result.abort_reason);

  RunOutcome out;
  out.dir = dir;
  out.checkpoint = Checkpoint{result.model, data.stats, config.train.seed, cfg_json};
  save_checkpoint(out.checkpoint, dir / kCheckpointFile);
  const std::vector<double> scores = predict(result.model, data.test_set.features).scores;
  out.confusion = confusion(scores, data.test_set.labels);
  out.metrics = evaluate_scores(scores, data.test_set.labels);

  const json metrics = {{"model", to_string(kind)},
                        {"seed", config.train.seed},
                        {"mcc", out.metrics.mcc},
                        {"accuracy", out.metrics.accuracy},
                        {"roc_auc", out.metrics.roc_auc},
                        {"config_hash", hash},
                        {"best_epoch", result.best_epoch},
                        {"epochs", result.history.epochs.size()},
                        {"confusion", confusion_json(out.confusion)}};
  // Written last: its presence marks the run complete.
  write_file_atomic(dir / "metrics.json", metrics.dump(2) + "\n");
  say(log, "done " + tag + " mcc " + format_double(out.metrics.mcc));
  return out;
}

// ---- pipelines ---------------------------------------------------------------------------

RunOutcome run_pipeline(const DataBundle& data, ModelKind kind, const PipelineConfig& config,
                        const fs::path& root, const Log& log) {
  auto run_config = [&](ModelKind k) {
    RunConfig rc;
    rc.train = config.base;
    rc.train.kind = k;
    rc.fraction = config.fraction;
    rc.data = config.data;
    return rc;
  };
  const auto dir = [&](ModelKind k) { return root / std::string(to_string(k)); };
  if (kind != ModelKind::kJoint) return run_single(data, run_config(kind), dir(kind), log);

  RunConfig jc = run_config(ModelKind::kJoint);
  const ModelKind subs[] = {ModelKind::kLocal, ModelKind::kRegional, ModelKind::kGlobal};
  for (std::size_t i = 0; i < 3; ++i) {
    const RunOutcome sub = run_single(data, run_config(subs[i]), dir(subs[i]), log);
    jc.sub_checkpoints[i] = (sub.dir / kCheckpointFile).string();
  }
  jc.train.lr = config.joint_lr;
  jc.train.head_lr = config.joint_head_lr;
  jc.train.contrastive = ContrastiveKind::kNone;
  if (config.joint_epochs > 0) jc.train.max_epochs = config.joint_epochs;
  return run_single(data, jc, dir(ModelKind::kJoint), log);
}

// ---- studies ------------------------------------------------------------------------------

std::string table_models(std::span<const MwrExam> data, const StudyConfig& cfg,
                         const fs::path& root, const Log& log) {
  return models_table(data, cfg, root, log).csv();
}

std::string table_losses(std::span<const MwrExam> data, const StudyConfig& cfg,
                         const fs::path& root, const Log& log) {
  return losses_table(data, cfg, root, log).csv();
}

std::string fraction_sweep(std::span<const MwrExam> data, const StudyConfig& cfg,
                           const fs::path& root, const Log& log) {
  return fraction_table(data, cfg, root, log).csv();
}

std::string batch_sweep(std::span<const MwrExam> data, const StudyConfig& cfg,
                        const fs::path& root, const Log& log) {
  return batch_table(data, cfg, root, log).csv();
}

std::map<AugmentKind, std::string> robustness_study(std::span<const MwrExam> data,
                                                    const StudyConfig& cfg, const fs::path& root,
                                                    const Log& log) {
  std::map<AugmentKind, std::string> out;
  for (auto& [kind, table] : robustness_tables(data, cfg, root, log)) out.emplace(kind, table.csv());
  return out;
}

namespace {
inline constexpr const char* kEnsembleMethods[] = {"jmwr",      "average",    "majority",
                                                   "logistic",  "linear_svm", "decision_tree"};
}

EnsembleSeed ensemble_for_seed(const DataBundle& data, const RunOutcome& local,
                               const RunOutcome& regional, const RunOutcome& global,
                               const RunOutcome& joint) {
  auto sub_scores = [&](const std::vector<Features>& x) {
    const auto l = predict(local.checkpoint.model, x).scores;
    const auto r = predict(regional.checkpoint.model, x).scores;
    const auto g = predict(global.checkpoint.model, x).scores;
    std::vector<SubScores> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = {l[i], r[i], g[i]};
    return s;
  };
  EnsembleSeed e;
  const std::vector<SubScores> train_x = sub_scores(data.train_set.features);
  e.sub_scores = sub_scores(data.test_set.features);
  e.labels = data.test_set.labels;
  for (const MwrExam& ex : data.test) e.ids.push_back(ex.id);
  for (MetaKind k : kAllMetaKinds) {
    const MetaClassifier clf = fit_meta(k, train_x, data.train_set.labels);
    e.scores[std::string(to_string(k))] = meta_predict(clf, e.sub_scores);
  }
  e.scores["jmwr"] = predict(joint.checkpoint.model, data.test_set.features).scores;
  e.joint_checkpoint = (joint.dir / kCheckpointFile).generic_string();
  return e;
}

std::string ensemble_table(std::span<const EnsembleSeed> seeds) {
  std::ostringstream os;
  os << "method,mcc,mcc_mean,mcc_std,checkpoint\n";
  for (const char* method : kEnsembleMethods) {
    std::vector<double> mccs;
    std::string paths;
    for (const EnsembleSeed& s : seeds) {
      mccs.push_back(mcc(confusion(s.scores.at(method), s.labels)));
      if (std::string_view(method) == "jmwr") {
        if (!paths.empty()) paths += ';';
        paths += s.joint_checkpoint;
      }
    }
    const MeanStd m = mean_std(mccs);
    os << method << ',' << m.format() << ',' << format_double(m.mean) << ','
       << format_double(m.std) << ',' << paths << '\n';
  }
  return os.str();
}

std::string ensemble_scores_csv(const EnsembleSeed& seed) {
  std::ostringstream os;
  os << "id,label,s_local,s_regional,s_global";
  for (const char* m : kEnsembleMethods) os << ',' << m;
  os << '\n';
  for (std::size_t i = 0; i < seed.labels.size(); ++i) {
    os << seed.ids[i] << ',' << seed.labels[i];
    for (double v : seed.sub_scores[i]) os << ',' << format_double(v);
    for (const char* m : kEnsembleMethods) os << ',' << format_double(seed.scores.at(m)[i]);
    os << '\n';
  }
  return os.str();
}

std::string ensemble_study(std::span<const MwrExam> data, const StudyConfig& cfg,
                           const fs::path& root, const Log& log) {
  return ensemble_table(ensemble_seeds(data, cfg, root, log));
}

// ---- embeddings ------------------------------------------------------------------------------

EmbeddingExport export_embeddings(const Checkpoint& ckpt, std::span<const MwrExam> exams) {
  if (exams.empty()) throw DataError("export-embeddings: no exams");
  const Predictions p = predict(ckpt.model, normalize_all(exams, ckpt.norm), true);
  std::vector<int> labels;
  for (const MwrExam& e : exams) labels.push_back(e.label);
  EmbeddingExport out;
  out.confusion = confusion(p.scores, labels);

  std::ostringstream os;
  os << "id,label,correct";
  const std::size_t width = ckpt.model.embedding_width();
  for (std::size_t k = 0; k < width; ++k) os << ",e" << k;
  os << '\n';
  for (std::size_t i = 0; i < exams.size(); ++i) {
    const int pred = p.scores[i] >= kDecisionThreshold ? 1 : 0;
    os << exams[i].id << ',' << labels[i] << ',' << (pred == labels[i] ? 1 : 0);
    for (double v : p.embeddings[i]) os << ',' << format_double(v);
    os << '\n';
  }
  out.csv = os.str();

  out.stats = {{"model", to_string(ckpt.model.kind)},
               {"cases", exams.size()},
               {"width", width},
               {"confusion", confusion_json(out.confusion)}};
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (pos >= 2 && labels.size() - pos >= 2) {
    const EmbeddingStats s = embedding_distance_stats(p.embeddings, labels);
    out.stats["within_class"] = {{"mean", s.within.mean}, {"std", s.within.std},
                                 {"pairs", s.within_pairs}};
    out.stats["between_class"] = {{"mean", s.between.mean}, {"std", s.between.std},
                                  {"pairs", s.between_pairs}};
  } else {
    out.stats["within_class"] = nullptr;
    out.stats["between_class"] = nullptr;
  }
  return out;
}

// ---- full protocol ----------------------------------------------------------------------------

void reproduce_all(const ReproduceConfig& cfg, const fs::path& out, const Log& log) {
  const Dataset data = default_synthetic(cfg.n_cases, cfg.data_seed);
  std::ostringstream csv;
  write_csv(data, csv);
  write_file_atomic(out / "data.csv", csv.str());
  StudyConfig study = cfg.study;
  study.pipeline.data = "synthetic n_cases=" + std::to_string(cfg.n_cases) +
                        " seed=" + std::to_string(cfg.data_seed);
  const fs::path root = out / "runs";

  say(log, "model comparison");
  const MetricTable models = models_table(data, study, root, log);
  write_file_atomic(out / "models.csv", models.csv());

  say(log, "ensemble study");
  const std::vector<EnsembleSeed> ens = ensemble_seeds(data, study, root, log);
  const std::string ens_csv = ensemble_table(ens);
  write_file_atomic(out / "ensemble.csv", ens_csv);
  for (const EnsembleSeed& e : ens) {
    write_file_atomic(out / ("ensemble_scores_" + seed_dir(e.seed) + ".csv"), ensemble_scores_csv(e));
  }

  say(log, "robustness study");
  const auto robust = robustness_tables(data, study, root, log);
  for (const auto& [kind, table] : robust) {
    write_file_atomic(out / ("robustness_" + std::string(to_string(kind)) + ".csv"), table.csv());
  }

  say(log, "training-fraction sweep");
  const MetricTable fractions = fraction_table(data, study, root, log);
  write_file_atomic(out / "sweep_fraction.csv", fractions.csv());

  say(log, "batch-wise losses");
  const MetricTable losses = losses_table(data, study, root, log);
  write_file_atomic(out / "losses.csv", losses.csv());

  say(log, "batch-size sweep");
  const MetricTable batches = batch_table(data, study, root, log);
  write_file_atomic(out / "sweep_batch.csv", batches.csv());

  std::ostringstream md;
  md << "# Reproduction summary\n\n"
     << "Synthetic MWR data: " << cfg.n_cases << " cases, generator seed " << cfg.data_seed
     << ", split seed " << kSplitSeed << ". Seeds:";
  for (std::uint64_t s : study.seeds) md << ' ' << s;
  md << ". Max epochs " << study.pipeline.base.max_epochs << ", J-MWR fine-tune epochs "
     << (study.pipeline.joint_epochs ? study.pipeline.joint_epochs
                                     : study.pipeline.base.max_epochs)
     << ".\n\nMetrics are test-split mean ± population std over seeds. These numbers "
        "describe the synthetic generator, not a clinical cohort.\n\n"
     << "## Models (models.csv)\n\n" << models.markdown()
     << "\n## Batch-wise losses (losses.csv)\n\n" << losses.markdown()
     << "\n## Ensembles (ens_csv_ensemble.csv)\n\n| method | MCC |\n|---|---|\n";
  {
    std::istringstream in(ens_csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string method, m;
      std::getline(row, method, ',');
      std::getline(row, m, ',');
      md << "| " << method << " | " << m << " |\n";
    }
  }
  md << "\n## Other outputs\n\n"
     << "- fractions_fraction.csv: training-set fraction sweep\n"
     << "- batches_batch.csv: batch-size sweep\n";
  for (const auto& [kind, table] : robust) {
    md << "- robust_" << to_string(kind) << ".csv: robustness to " << to_string(kind) << "\n";
  }
  md << "- ens_csv_scores_s<seed>.csv: per-case sub-model and combiner scores\n"
     << "- runs/: one directory per trained model (config, checkpoint, history, metrics)\n";
  write_file_atomic(out / "summary.md", md.str());
  say(log, "wrote " + (out / "summary.md").string());
}

}  // namespace scmwr
