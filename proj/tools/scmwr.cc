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

// scmwr: data generation, training, evaluation, sweeps, ensembles and the
// full reproduction protocol. Exit codes: 0 ok, 2 configuration, 3 data,
// 4 numeric failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scmwr/checkpoint.h"
#include "scmwr/errors.h"
#include "scmwr/experiment.h"
#include "scmwr/io.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scmwr;

namespace {

bool g_quiet = false;

void log_line(const std::string& msg) {
  if (g_quiet && msg.starts_with("  ")) return;  // per-epoch detail
  std::cerr << "[scmwr] " << msg << '\n';
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---- shared option groups -----------------------------------------------------------

struct DataOptions {
  std::string path;
  std::size_t n_cases = kDeskScaleCases;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("--data", path, "Dataset CSV (default: generate synthetic data)");
    app->add_option("--n-cases", n_cases, "Synthetic cases when --data is absent")
        ->capture_default_str();
    app->add_option("--data-seed", seed, "Generator seed when --data is absent")
        ->capture_default_str();
  }

  Dataset load() const {
    if (!path.empty()) return parse_csv(fs::path(path));
    return default_synthetic(n_cases, seed);
  }

  std::string describe() const {
    if (!path.empty()) return path;
    return "synthetic n_cases=" + std::to_string(n_cases) + " seed=" + std::to_string(seed);
  }
};

// Training flags layered over defaults and --config. Only flags the user
// actually gave override the file.
struct TrainOptions {
  std::string model, config, contrastive, gate, local, regional, global;
  std::optional<std::uint64_t> seed, split_seed;
  std::optional<double> lr, head_lr, beta1, beta2, contrastive_weight, margin, gate_steepness,
      fraction;
  std::optional<std::size_t> batch_size, max_epochs, early_stop;

  void add(CLI::App* app, bool with_model, bool with_subs) {
    if (with_model) {
      app->add_option("--model", model, "base, lmwr, rmwr, gmwr or jmwr");
    }
    app->add_option("--config", config, "JSON run/train config; flags override it");
    app->add_option("--seed", seed, "Training seed (init and shuffling)");
    app->add_option("--lr", lr, "Learning rate (J-MWR: sub-model fine-tune rate)");
    app->add_option("--head-lr", head_lr, "J-MWR weighting/head learning rate");
    app->add_option("--beta1", beta1);
    app->add_option("--beta2", beta2);
    app->add_option("--batch-size", batch_size);
    app->add_option("--max-epochs", max_epochs);
    app->add_option("--early-stop", early_stop, "Epochs without val improvement before stopping");
    app->add_option("--contrastive", contrastive,
                    "none, contrastive, npairs, triplet_hard or triplet_semihard");
    app->add_option("--contrastive-weight", contrastive_weight);
    app->add_option("--margin", margin);
    app->add_option("--gate", gate, "soft or hard");
    app->add_option("--gate-steepness", gate_steepness);
    app->add_option("--fraction", fraction, "Training-set fraction in (0, 1]");
    app->add_option("--split-seed", split_seed);
    if (with_subs) {
      app->add_option("--local", local, "L-MWR checkpoint (J-MWR)");
      app->add_option("--regional", regional, "R-MWR checkpoint (J-MWR)");
      app->add_option("--global", global, "G-MWR checkpoint (J-MWR)");
    }
  }

  RunConfig resolve(ModelKind fallback) const {
    ModelKind kind = fallback;
    if (!model.empty()) kind = parse_model_kind(model);
    RunConfig rc;
    rc.train = default_train_config(kind);
    if (!config.empty()) {
      json j = read_json(config);
      if (!model.empty() && j.is_object()) j["model"] = model;
      rc = run_config_from_json(j, kind);
    }
    TrainConfig& t = rc.train;
    if (seed) t.seed = *seed;
    if (lr) t.lr = *lr;
    if (head_lr) t.head_lr = *head_lr;
    if (beta1) t.beta1 = *beta1;
    if (beta2) t.beta2 = *beta2;
    if (batch_size) t.batch_size = *batch_size;
    if (max_epochs) t.max_epochs = *max_epochs;
    if (early_stop) t.early_stop_patience = *early_stop;
    if (!contrastive.empty()) t.contrastive = parse_contrastive_kind(contrastive);
    if (contrastive_weight) t.contrastive_weight = *contrastive_weight;
    if (margin) t.margin = *margin;
    if (!gate.empty()) {
      if (gate != "soft" && gate != "hard") throw ConfigError("--gate must be soft or hard");
      t.gate.mode = gate == "soft" ? ad::GateMode::kSoft : ad::GateMode::kHard;
    }
    if (gate_steepness) t.gate.steepness = *gate_steepness;
    if (fraction) rc.fraction = *fraction;
    if (split_seed) rc.split_seed = *split_seed;
    if (!local.empty()) rc.sub_checkpoints[0] = local;
    if (!regional.empty()) rc.sub_checkpoints[1] = regional;
    if (!global.empty()) rc.sub_checkpoints[2] = global;
    if (!(rc.fraction > 0.0 && rc.fraction <= 1.0)) {
      throw ConfigError("--fraction must lie in (0, 1]");
    }
    t.validate();
    return rc;
  }
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--seeds: '" + item + "' is not a non-negative integer");
    }
  }
  if (out.empty()) throw ConfigError("--seeds: need at least one seed");
  return out;
}

std::vector<ModelKind> parse_models(const std::string& text) {
  if (text == "all") return {std::begin(kAllModelKinds), std::end(kAllModelKinds)};
  std::vector<ModelKind> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_model_kind(item));
  return out;
}

struct Split {
  Dataset exams;
  std::string name;
};

Split pick_split(const DataBundle& b, std::span<const MwrExam> all, const std::string& name) {
  if (name == "train") return {b.train, name};
  if (name == "val") return {b.val, name};
  if (name == "test") return {b.test, name};
  if (name == "all") return {Dataset(all.begin(), all.end()), name};
  throw ConfigError("--split must be train, val, test or all");
}

// ---- commands ------------------------------------------------------------------------------

int cmd_gen_data(const std::string& config, std::optional<std::size_t> n,
                 std::optional<double> fraction, std::optional<std::uint64_t> seed,
                 const std::string& out_dir, const std::string& out_name) {
  GeneratorConfig g;
  if (!config.empty()) {
    try {
      from_json(read_json(config), g);
    } catch (const json::exception& e) {
      throw ConfigError(config + ": " + e.what());
    }
  }
  if (n) g.n_cases = *n;
  if (fraction) g.positive_fraction = *fraction;
  if (seed) g.seed = *seed;
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    std::string field = msg.substr(0, msg.find(':'));
    if (field == "n_cases") field = "n";
    std::replace(field.begin(), field.end(), '_', '-');
    throw ConfigError("--" + field + ": " + msg);
  }
  const Dataset d = generate_synthetic(g);
  const fs::path csv_path = fs::path(out_dir) / out_name;
  std::ostringstream os;
  write_csv(d, os);
  write_file_atomic(csv_path, os.str());
  fs::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  write_file_atomic(sidecar, json(g).dump(2) + "\n");
  log_line("wrote " + csv_path.string() + " (" + std::to_string(d.size()) + " cases, " +
           std::to_string(count_positive(d)) + " positive)");
  return 0;
}

int cmd_train(const TrainOptions& opts, const DataOptions& data_opts, std::string out_dir) {
  RunConfig rc = opts.resolve(ModelKind::kBase);
  if (opts.model.empty() && opts.config.empty()) throw ConfigError("--model is required");
  rc.data = data_opts.describe();
  const Dataset data = data_opts.load();
  const DataBundle bundle = make_data_bundle(data, rc.fraction, rc.train.seed, rc.split_seed);
  if (out_dir.empty()) {
    out_dir = "runs/" + std::string(to_string(rc.train.kind)) + "_s" + std::to_string(rc.train.seed);
  }
  const RunOutcome r = run_single(bundle, rc, out_dir, log_line);
  std::cout << "model " << display_name(rc.train.kind) << " mcc " << format_double(r.metrics.mcc)
            << " accuracy " << format_double(r.metrics.accuracy) << " roc_auc "
            << format_double(r.metrics.roc_auc) << " -> " << r.dir.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint, const DataOptions& data_opts,
             const std::string& split, std::optional<std::uint64_t> split_seed,
             const std::string& out_dir) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const Dataset data = data_opts.load();
  const std::uint64_t ss =
      split_seed ? *split_seed : ckpt.config.value("split_seed", kSplitSeed);
  const DataBundle bundle = make_data_bundle(data, 1.0, 1, ss);
  const Split s = pick_split(bundle, data, split);
  const std::vector<Features> x = normalize_all(s.exams, ckpt.norm);
  std::vector<int> y;
  for (const MwrExam& e : s.exams) y.push_back(e.label);
  const std::vector<double> scores = predict(ckpt.model, x).scores;
  const ConfusionMatrix c = confusion(scores, y);
  const RunMetrics m = evaluate_scores(scores, y);

  std::ostringstream csv;
  csv << "id,label,score,prediction\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    csv << s.exams[i].id << ',' << y[i] << ',' << format_double(scores[i]) << ','
        << (scores[i] >= kDecisionThreshold ? 1 : 0) << '\n';
  }
  const json metrics = {{"model", to_string(ckpt.model.kind)},
                        {"seed", ckpt.seed},
                        {"mcc", m.mcc},
                        {"accuracy", m.accuracy},
                        {"roc_auc", m.roc_auc},
                        {"config_hash", sha256_hex(ckpt.config.dump()).substr(0, 16)},
                        {"split", split},
                        {"data", data_opts.describe()},
                        {"confusion", {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}}}};
  write_file_atomic(fs::path(out_dir) / "scores.csv", csv.str());
  write_file_atomic(fs::path(out_dir) / "eval_metrics.json", metrics.dump(2) + "\n");
  std::cout << "mcc " << format_double(m.mcc) << " accuracy " << format_double(m.accuracy)
            << " roc_auc " << format_double(m.roc_auc) << '\n';
  return 0;
}

StudyConfig study_from(const TrainOptions& opts, const std::string& seeds,
                       const std::string& models, std::size_t joint_epochs,
                       const std::string& data_desc) {
  const RunConfig rc = opts.resolve(ModelKind::kBase);
  StudyConfig s;
  s.pipeline.base = rc.train;
  s.pipeline.fraction = rc.fraction;
  s.pipeline.joint_epochs = joint_epochs;
  s.pipeline.data = data_desc;
  if (opts.head_lr) s.pipeline.joint_head_lr = *opts.head_lr;
  s.seeds = parse_seeds(seeds);
  s.models = parse_models(models);
  return s;
}

int cmd_sweep(const std::string& kind, const TrainOptions& opts, const DataOptions& data_opts,
              const std::string& seeds, const std::string& models, std::size_t joint_epochs,
              std::string out_dir) {
  if (out_dir.empty()) out_dir = "sweep_" + kind;
  const StudyConfig study = study_from(opts, seeds, models, joint_epochs, data_opts.describe());
  const Dataset data = data_opts.load();
  const fs::path out(out_dir);
  const fs::path root = out / "runs";
  if (kind == "batch") {
    write_file_atomic(out / "sweep_batch.csv", batch_sweep(data, study, root, log_line));
  } else if (kind == "fraction") {
    write_file_atomic(out / "sweep_fraction.csv", fraction_sweep(data, study, root, log_line));
  } else if (kind == "robustness") {
    for (const auto& [aug, csv] : robustness_study(data, study, root, log_line)) {
      write_file_atomic(out / ("sweep_robustness_" + std::string(to_string(aug)) + ".csv"), csv);
    }
  } else {
    throw ConfigError("--kind must be batch, fraction or robustness");
  }
  log_line("wrote sweep outputs under " + out.string());
  return 0;
}

RunOutcome outcome_from_checkpoint(const std::string& path, ModelKind kind) {
  RunOutcome r;
  r.checkpoint = load_checkpoint(path, kind);
  r.dir = fs::path(path).parent_path();
  return r;
}

int cmd_ensemble(const TrainOptions& opts, const DataOptions& data_opts, const std::string& seeds,
                 std::size_t joint_epochs, std::string out_dir) {
  if (out_dir.empty()) out_dir = "ensemble";
  const fs::path out(out_dir);
  const Dataset data = data_opts.load();
  std::vector<EnsembleSeed> results;
  const bool given = !opts.local.empty() || !opts.regional.empty() || !opts.global.empty();
  if (given) {
    if (opts.local.empty() || opts.regional.empty() || opts.global.empty()) {
      throw ConfigError("ensemble needs all of --local, --regional and --global");
    }
    RunConfig rc = opts.resolve(ModelKind::kJoint);
    rc.train.kind = ModelKind::kJoint;
    if (!opts.lr) rc.train.lr = kFineTuneLr;
    if (joint_epochs > 0) rc.train.max_epochs = joint_epochs;
    rc.train.contrastive = ContrastiveKind::kNone;
    rc.data = data_opts.describe();
    const DataBundle bundle = make_data_bundle(data, rc.fraction, rc.train.seed, rc.split_seed);
    const RunOutcome l = outcome_from_checkpoint(opts.local, ModelKind::kLocal);
    const RunOutcome r = outcome_from_checkpoint(opts.regional, ModelKind::kRegional);
    const RunOutcome g = outcome_from_checkpoint(opts.global, ModelKind::kGlobal);
    const RunOutcome j = run_single(bundle, rc, out / "jmwr", log_line);
    EnsembleSeed e = ensemble_for_seed(bundle, l, r, g, j);
    e.seed = rc.train.seed;
    results.push_back(std::move(e));
  } else {
    const StudyConfig study = study_from(opts, seeds, "all", joint_epochs, data_opts.describe());
    // Reuse the study helpers through a models table restricted to the tiers.
    StudyConfig s = study;
    s.models = {ModelKind::kLocal, ModelKind::kRegional, ModelKind::kGlobal, ModelKind::kJoint};
    const DataBundle bundle = make_data_bundle(data);
    for (std::uint64_t seed : s.seeds) {
      PipelineConfig p = s.pipeline;
      p.base.seed = seed;
      const fs::path dir = out / "runs" / "plain" / ("s" + std::to_string(seed));
      const RunOutcome j = run_pipeline(bundle, ModelKind::kJoint, p, dir, log_line);
      const RunOutcome l = run_pipeline(bundle, ModelKind::kLocal, p, dir, log_line);
      const RunOutcome r = run_pipeline(bundle, ModelKind::kRegional, p, dir, log_line);
      const RunOutcome g = run_pipeline(bundle, ModelKind::kGlobal, p, dir, log_line);
      EnsembleSeed e = ensemble_for_seed(bundle, l, r, g, j);
      e.seed = seed;
      results.push_back(std::move(e));
    }
  }
  for (EnsembleSeed& e : results) {
    e.joint_checkpoint = fs::path(e.joint_checkpoint).lexically_relative(out).generic_string();
    write_file_atomic(out / ("ensemble_scores_s" + std::to_string(e.seed) + ".csv"),
                      ensemble_scores_csv(e));
  }
  const std::string table = ensemble_table(results);
  write_file_atomic(out / "ensemble.csv", table);
  std::cout << table;
  return 0;
}

int cmd_export(const std::string& checkpoint, const DataOptions& data_opts,
               const std::string& split, const std::string& out_dir) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const Dataset data = data_opts.load();
  const DataBundle bundle =
      make_data_bundle(data, 1.0, 1, ckpt.config.value("split_seed", kSplitSeed));
  const Split s = pick_split(bundle, data, split);
  const EmbeddingExport e = export_embeddings(ckpt, s.exams);
  json stats = e.stats;
  stats["split"] = split;
  write_file_atomic(fs::path(out_dir) / "embeddings.csv", e.csv);
  write_file_atomic(fs::path(out_dir) / "embedding_stats.json", stats.dump(2) + "\n");
  log_line("wrote " + (fs::path(out_dir) / "embeddings.csv").string());
  return 0;
}

int cmd_reproduce(const TrainOptions& opts, std::size_t n_cases, std::uint64_t data_seed,
                  const std::string& seeds, std::size_t joint_epochs, std::string out_dir) {
  if (out_dir.empty()) out_dir = "reproduce";
  ReproduceConfig cfg;
  cfg.n_cases = n_cases;
  cfg.data_seed = data_seed;
  cfg.study = study_from(opts, seeds, "all", joint_epochs, "");
  reproduce_all(cfg, out_dir, log_line);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-contrastive MWR models: data, training, evaluation and studies"};
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", g_quiet, "Hide per-epoch progress");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic MWR dataset");
  std::string gen_config, gen_out_dir = ".", gen_out = "data.csv";
  std::optional<std::size_t> gen_n;
  std::optional<double> gen_fraction;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--config", gen_config, "Generator config JSON");
  gen->add_option("--n", gen_n, "Number of cases (default 4932)");
  gen->add_option("--positive-fraction", gen_fraction, "Share of cancer cases");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out-dir", gen_out_dir)->capture_default_str();
  gen->add_option("--out", gen_out, "CSV file name inside --out-dir")->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "Train one model into a run directory");
  TrainOptions tr_opts;
  DataOptions tr_data;
  std::string tr_out;
  tr_opts.add(tr, true, true);
  tr_data.add(tr);
  tr->add_option("--out-dir", tr_out, "Run directory (default runs/<model>_s<seed>)");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a data split");
  std::string ev_ckpt, ev_split = "test", ev_out = ".";
  std::optional<std::uint64_t> ev_seed;
  DataOptions ev_data;
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--split", ev_split, "train, val, test or all")->capture_default_str();
  ev->add_option("--split-seed", ev_seed, "Split seed (default: the checkpoint's)");
  ev->add_option("--out-dir", ev_out)->capture_default_str();
  ev_data.add(ev);

  // sweep
  auto* sw = app.add_subcommand("sweep", "Batch-size, training-fraction or robustness sweep");
  std::string sw_kind, sw_seeds = "1,2,3", sw_models = "all", sw_out;
  std::size_t sw_joint_epochs = 0;
  TrainOptions sw_opts;
  DataOptions sw_data;
  sw->add_option("--kind", sw_kind, "batch, fraction or robustness")->required();
  sw->add_option("--seeds", sw_seeds)->capture_default_str();
  sw->add_option("--models", sw_models, "Comma-separated kinds or all")->capture_default_str();
  sw->add_option("--joint-epochs", sw_joint_epochs, "J-MWR epoch cap (0 = --max-epochs)");
  sw->add_option("--out-dir", sw_out, "Output directory (default sweep_<kind>)");
  sw_opts.add(sw, false, false);
  sw_data.add(sw);

  // ensemble
  auto* en = app.add_subcommand("ensemble", "Compare J-MWR with averaging, voting and meta-classifiers");
  std::string en_seeds = "1,2,3", en_out;
  std::size_t en_joint_epochs = 0;
  TrainOptions en_opts;
  DataOptions en_data;
  en_opts.add(en, false, true);
  en_data.add(en);
  en->add_option("--seeds", en_seeds, "Seeds when sub-models are trained here")
      ->capture_default_str();
  en->add_option("--joint-epochs", en_joint_epochs, "J-MWR epoch cap (0 = --max-epochs)");
  en->add_option("--out-dir", en_out, "Output directory (default ensemble)");

  // export-embeddings
  auto* ex = app.add_subcommand("export-embeddings", "Write embedding-hook vectors and distance stats");
  std::string ex_ckpt, ex_split = "test", ex_out = ".";
  DataOptions ex_data;
  ex->add_option("--checkpoint", ex_ckpt)->required();
  ex->add_option("--split", ex_split, "train, val, test or all")->capture_default_str();
  ex->add_option("--out-dir", ex_out)->capture_default_str();
  ex_data.add(ex);

  // reproduce-all
  auto* ra = app.add_subcommand("reproduce-all", "Run the full study protocol (resumable)");
  std::string ra_seeds = "1,2,3", ra_out;
  std::size_t ra_cases = kDeskScaleCases, ra_joint_epochs = 10;
  std::uint64_t ra_data_seed = 1;
  TrainOptions ra_opts;
  ra_opts.max_epochs = 30;
  ra_opts.add(ra, false, false);
  ra->add_option("--n-cases", ra_cases)->capture_default_str();
  ra->add_option("--data-seed", ra_data_seed)->capture_default_str();
  ra->add_option("--seeds", ra_seeds)->capture_default_str();
  ra->add_option("--joint-epochs", ra_joint_epochs, "J-MWR epoch cap (0 = --max-epochs)")
      ->capture_default_str();
  ra->add_option("--out-dir", ra_out, "Output directory (default reproduce)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) return cmd_gen_data(gen_config, gen_n, gen_fraction, gen_seed, gen_out_dir, gen_out);
    if (*tr) return cmd_train(tr_opts, tr_data, tr_out);
    if (*ev) return cmd_eval(ev_ckpt, ev_data, ev_split, ev_seed, ev_out);
    if (*sw) {
      return cmd_sweep(sw_kind, sw_opts, sw_data, sw_seeds, sw_models, sw_joint_epochs, sw_out);
    }
    if (*en) return cmd_ensemble(en_opts, en_data, en_seeds, en_joint_epochs, en_out);
    if (*ex) return cmd_export(ex_ckpt, ex_data, ex_split, ex_out);
    if (*ra) {
      return cmd_reproduce(ra_opts, ra_cases, ra_data_seed, ra_seeds, ra_joint_epochs, ra_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
