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

// Acceptance checks 1-8. Prints one PASS/FAIL line per criterion on stdout,
// details on stderr, and exits non-zero if anything failed.
//
//   scmwr_acceptance [--work-dir DIR] [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scmwr/checkpoint.h"
#include "scmwr/experiment.h"
#include "scmwr/grad_check.h"
#include "scmwr/io.h"
#include "scmwr/metrics.h"
#include "scmwr/model.h"
#include "scmwr/optim.h"
#include "scmwr/robustness.h"

namespace fs = std::filesystem;
using namespace scmwr;
using ad::Matrix;
using ad::Tape;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      std::cerr << "    failed: " << what << '\n';
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) { return format_double(v); }

// ---- 1: full-model gradient checks ------------------------------------------------

Verdict gradients() {
  Verdict v;
  const auto t0 = Clock::now();
  GeneratorConfig g;
  g.n_cases = 40;
  g.positive_fraction = 0.5;
  g.seed = 17;
  const Dataset data = generate_synthetic(g);
  const NormStats stats = fit_normalization(data);
  // two of each class
  Dataset batch{data[0], data[1], data[38], data[39]};
  const std::vector<Features> x = normalize_all(batch, stats);
  double worst = 0.0;
  // J-MWR is assembled from the sub-models checked above, as in training.
  // A freshly seeded J can draw an L-MWR whose single-unit ReLU feature is
  // dead on the whole batch, which would leave that path unexercised.
  std::vector<std::pair<std::string, ModelBundle>> cases;
  for (ModelKind k : kAllModelKinds) {
    if (k != ModelKind::kJoint) cases.emplace_back(to_string(k), make_model(k, 5));
  }
  cases.emplace_back("jmwr", make_joint(cases[1].second, cases[2].second, cases[3].second, 5));
  for (auto& [label, m] : cases) {
    const ModelKind k = m.kind;
    const ModelInputs in = build_inputs(k, x);
    std::vector<Matrix*> ps;
    for (auto& [name, p] : m.params) ps.push_back(&p);
    ad::GradCheckOptions opt;
    // f is a sum of bounded scores, so central differences carry ~1e-11 of
    // rounding; gradients under 1e-6 are held to an absolute 1e-10 instead.
    opt.rel_floor = 1e-6;
    opt.eps = 1e-5;
    opt.kink_tolerance = 1e-9;
    opt.max_coords_per_param = 4;
    const auto r = ad::grad_check(
        [&](Tape& t) {
          ParamBinder p(t, m.params);
          return ad::sum(forward(p, k, in, m.gate).score);
        },
        ps, opt);
    std::cerr << "    " << label << ": max rel err " << fmt(r.max_rel_error) << " over "
              << r.checked << " coords, " << r.skipped_kinks << " near kinks, " << r.below_floor << " under floor";
    if (r.max_rel_error >= 1e-4) {
      auto it = m.params.begin();
      std::advance(it, static_cast<std::ptrdiff_t>(r.worst_param));
      std::cerr << " (worst " << it->first << '[' << r.worst_index << "] analytic "
                << fmt(r.worst_analytic) << " numeric " << fmt(r.worst_numeric) << ')';
    }
    std::cerr << '\n';
    v.require(r.max_rel_error < 1e-4, label + " rel err");
    v.require(r.skipped_kinks * 20 < r.checked, label + " too many kinks");
    worst = std::max(worst, r.max_rel_error);
  }
  const double secs = seconds_since(t0);
  v.require(secs < 120.0, "runtime under 2 min");
  v.detail = "max rel err " + fmt(worst) + ", " + fmt(std::round(secs * 10) / 10) + " s";
  return v;
}

// ---- 2: symmetries ------------------------------------------------------------------

double single_score(const ModelBundle& m, const Features& f) {
  return predict(m, std::span<const Features>(&f, 1)).scores[0];
}

Verdict symmetries() {
  Verdict v;
  GeneratorConfig g;
  g.n_cases = 100;
  g.positive_fraction = 0.3;
  g.seed = 23;
  const Dataset data = generate_synthetic(g);
  const std::vector<Features> x = normalize_all(data, fit_normalization(data));

  ModelBundle gm = make_model(ModelKind::kGlobal, 2);
  ModelBundle rm = make_model(ModelKind::kRegional, 3);
  ModelBundle lm = make_model(ModelKind::kLocal, 4);
  // Nonzero head biases keep scores away from the trivial 0.
  gm.params["gmwr.head.b"][0] = 0.2;
  rm.params["rmwr.head.b"][0] = -0.1;
  lm.params["lmwr.head.b"][0] = 0.05;

  Rng rng(99);
  double dg = 0.0, dr = 0.0, dl = 0.0;
  for (const Features& f : x) {
    dg = std::max(dg, std::fabs(single_score(gm, f) - single_score(gm, breast_swap(f))));

    const auto [left, right] = layout_regional(f);
    Matrix l(1, kRegionalWidth), r(1, kRegionalWidth);
    std::copy(left.begin(), left.end(), l.values().begin());
    std::copy(right.begin(), right.end(), r.values().begin());
    {
      Tape t;
      ParamBinder p(t, rm.params);
      const double a = rmwr_forward(p, t.constant(l), t.constant(r), rm.gate).score.item();
      const double b = rmwr_forward(p, t.constant(r), t.constant(l), rm.gate).score.item();
      dr = std::max(dr, std::fabs(a - b));
    }

    const LocalLayout pts = layout_local(f);
    std::vector<std::size_t> perm(kLocalInputs);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    Matrix a(kLocalInputs, 2), b(kLocalInputs, 2);
    for (std::size_t i = 0; i < kLocalInputs; ++i) {
      a(i, 0) = pts[i][0];
      a(i, 1) = pts[i][1];
      b(i, 0) = pts[perm[i]][0];
      b(i, 1) = pts[perm[i]][1];
    }
    Tape t;
    ParamBinder p(t, lm.params);
    const double sa = lmwr_forward(p, t.constant(a), lm.gate).score.item();
    const double sb = lmwr_forward(p, t.constant(b), lm.gate).score.item();
    dl = std::max(dl, std::fabs(sa - sb));
  }
  v.require(dg < 1e-9, "G-MWR breast swap");
  v.require(dr < 1e-9, "R-MWR argument swap");
  v.require(dl < 1e-9, "L-MWR permutation");
  v.detail = "100 exams, max |d| G " + fmt(dg) + " R " + fmt(dr) + " L " + fmt(dl);
  return v;
}

// ---- 3: metric oracles ----------------------------------------------------------------

double oracle_mcc(std::span<const double> s, std::span<const int> y) {
  long double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool pred = s[i] >= 0.5;
    if (pred && y[i] == 1) tp += 1;
    if (pred && y[i] == 0) fp += 1;
    if (!pred && y[i] == 0) tn += 1;
    if (!pred && y[i] == 1) fn += 1;
  }
  const long double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0) return 0.0;
  return static_cast<double>((tp * tn - fp * fn) / std::sqrt(den));
}

double oracle_accuracy(std::span<const double> s, std::span<const int> y) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < s.size(); ++i) hit += ((s[i] >= 0.5) == (y[i] == 1));
  return static_cast<double>(hit) / static_cast<double>(s.size());
}

double oracle_auc(std::span<const double> s, std::span<const int> y) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      ++pairs;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

Verdict metric_oracles() {
  Verdict v;
  Rng rng(2024);
  double worst = 0.0;
  for (int set = 0; set < 200; ++set) {
    const std::size_t n = 5 + rng.below(120);
    std::vector<double> s(n);
    std::vector<int> y(n);
    const bool coarse = set % 3 == 0;  // ties
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.bernoulli(0.3) ? 1 : 0;
      s[i] = coarse ? std::round(rng.uniform() * 10.0) / 10.0 : rng.uniform();
    }
    y[0] = 0;
    y[1] = 1;
    const RunMetrics m = evaluate_scores(s, y);
    worst = std::max({worst, std::fabs(m.mcc - oracle_mcc(s, y)),
                      std::fabs(m.accuracy - oracle_accuracy(s, y)),
                      std::fabs(m.roc_auc - oracle_auc(s, y))});
  }
  v.require(worst <= 1e-12, "brute-force agreement");

  ConfusionMatrix cm;
  cm.tp = 9;
  cm.tn = 85;
  cm.fp = 3;
  cm.fn = 3;
  const double worked_mcc = mcc(cm);
  v.require(worked_mcc == 756.0 / 1056.0, "worked MCC 756/1056, got " + fmt(worked_mcc));
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  const double worked_auc = roc_auc(s, y);
  v.require(worked_auc == 0.75, "worked AUC 0.75, got " + fmt(worked_auc));
  v.detail = "200 sets, max |d| " + fmt(worst) + ", MCC " + fmt(worked_mcc) + ", AUC " +
             fmt(worked_auc);
  return v;
}

// ---- 4: protocol fidelity ---------------------------------------------------------------

Verdict protocol(const fs::path& work) {
  Verdict v;
  PlateauScheduler p;
  double lr = 1e-4;
  std::vector<double> trace;
  for (double loss : {1.0, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9}) trace.push_back(lr = p.update(loss, lr));
  // epoch 2 improves; epochs 3-7 stall; the cut lands on the 5th stall.
  for (std::size_t i = 0; i < 6; ++i) v.require(trace[i] == 1e-4, "no cut before 5 stalls");
  v.require(trace[6] == 1e-4 * 0.1, "cut by exactly 0.1 after 5 stalls");
  v.require(trace[7] == 1e-4 * 0.1, "counter restarts after a cut");

  std::size_t checked = 0;
  for (std::size_t n : {10u, 37u, 200u, 2000u, 4932u}) {
    for (double frac : {0.05, 0.1111, 0.3, 0.5}) {
      const auto np = static_cast<std::size_t>(std::max(1.0, std::round(frac * n)));
      const std::size_t nn = n - np;
      const ClassWeights w = class_weights(nn, np);
      v.require(static_cast<double>(nn) * w.negative == static_cast<double>(np) * w.positive,
                "exact balance n=" + std::to_string(n));
      ++checked;
    }
  }

  // Defaults as persisted by an actual run directory.
  GeneratorConfig g;
  g.n_cases = 60;
  g.seed = 5;
  g.positive_fraction = 0.3;
  const DataBundle bundle = make_data_bundle(generate_synthetic(g));
  PipelineConfig pc;
  pc.base.max_epochs = 1;
  pc.data = "acceptance defaults";
  const fs::path root = work / "defaults";
  fs::remove_all(root);
  run_pipeline(bundle, ModelKind::kJoint, pc, root);
  run_pipeline(bundle, ModelKind::kBase, pc, root);
  for (const char* kind : {"base", "lmwr", "rmwr", "gmwr"}) {
    const auto j = nlohmann::json::parse(read_file(root / kind / "config.json"));
    const std::string k = kind;
    v.require(j.at("lr").get<double>() == 1e-4, k + " lr");
    v.require(j.at("beta1").get<double>() == 0.9, k + " beta1");
    v.require(j.at("beta2").get<double>() == 0.999, k + " beta2");
    v.require(j.at("batch_size").get<std::size_t>() == 4, k + " batch");
    v.require(j.at("contrastive_weight").get<double>() == 0.1, k + " contrastive weight");
  }
  const auto jj = nlohmann::json::parse(read_file(root / "jmwr" / "config.json"));
  v.require(jj.at("lr").get<double>() == 1e-7, "jmwr fine-tune lr");
  v.require(jj.at("beta1").get<double>() == 0.9 && jj.at("beta2").get<double>() == 0.999,
            "jmwr betas");
  v.require(jj.at("batch_size").get<std::size_t>() == 4, "jmwr batch");
  v.detail = "plateau trace ok, " + std::to_string(checked) +
             " weight balances exact, defaults read back from config.json";
  return v;
}

// ---- 5: end-to-end on synthetic data -------------------------------------------------------

struct EndToEnd {
  DataBundle bundle;
  std::map<ModelKind, RunOutcome> runs;
};

Verdict end_to_end(const fs::path& work, EndToEnd& out) {
  Verdict v;
  const auto t0 = Clock::now();
  out.bundle = make_data_bundle(default_synthetic());
  PipelineConfig pc;
  pc.base.max_epochs = 40;
  pc.joint_epochs = 20;
  pc.data = "synthetic n_cases=2000 seed=1";
  const fs::path root = work / "e2e";
  fs::remove_all(root);
  const Log log = [](const std::string& s) {
    if (!s.starts_with("  ")) std::cerr << "    " << s << '\n';
  };
  // J-MWR finds its sub-model runs already on disk and reuses them.
  for (ModelKind k : kAllModelKinds) out.runs[k] = run_pipeline(out.bundle, k, pc, root, log);
  const double secs = seconds_since(t0);

  auto m = [&](ModelKind k) { return out.runs.at(k).metrics.mcc; };
  const double best_sub =
      std::max({m(ModelKind::kLocal), m(ModelKind::kRegional), m(ModelKind::kGlobal)});
  v.require(m(ModelKind::kBase) >= 0.5, "Base MCC >= 0.5");
  v.require(m(ModelKind::kRegional) >= 0.5, "R-MWR MCC >= 0.5");
  v.require(m(ModelKind::kGlobal) >= 0.5, "G-MWR MCC >= 0.5");
  v.require(m(ModelKind::kLocal) >= 0.3, "L-MWR MCC >= 0.3");
  v.require(m(ModelKind::kJoint) >= best_sub - 0.02, "J-MWR MCC >= best sub-model - 0.02");
  v.require(secs < 900.0, "runtime under 15 min");
  std::ostringstream d;
  d << "MCC";
  for (ModelKind k : kAllModelKinds) d << ' ' << display_name(k) << ' ' << fmt(std::round(m(k) * 1000) / 1000);
  d << ", " << fmt(std::round(secs)) << " s";
  v.detail = d.str();
  return v;
}

// ---- 6: augmentation identities and sweep grids ----------------------------------------

std::vector<std::string> csv_column(const fs::path& path, const std::string& name) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  const auto col = std::find(header.begin(), header.end(), name) - header.begin();
  std::vector<std::string> out;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string cell;
    for (std::ptrdiff_t i = 0; i <= col && std::getline(ls, cell, ','); ++i) {
    }
    out.push_back(cell);
  }
  return out;
}

std::set<double> numeric_set(const std::vector<std::string>& cells) {
  std::set<double> s;
  for (const std::string& c : cells) s.insert(std::stod(c));
  return s;
}

Verdict augmentation(const EndToEnd* e2e, const fs::path& repro) {
  Verdict v;
  // Trained models when criterion 5 ran, fresh ones otherwise.
  std::vector<std::pair<ModelBundle, NormStats>> models;
  Dataset test;
  if (e2e != nullptr) {
    for (const auto& [k, r] : e2e->runs) models.emplace_back(r.checkpoint.model, r.checkpoint.norm);
    test = e2e->bundle.test;
  } else {
    GeneratorConfig g;
    g.n_cases = 120;
    g.positive_fraction = 0.3;
    g.seed = 8;
    test = generate_synthetic(g);
    for (ModelKind k : kAllModelKinds) models.emplace_back(make_model(k, 6), fit_normalization(test));
  }
  std::vector<int> y;
  for (const MwrExam& ex : test) y.push_back(ex.label);
  std::size_t identities = 0;
  for (const auto& [model, stats] : models) {
    const RunMetrics clean = evaluate_scores(predict(model, normalize_all(test, stats)).scores, y);
    const std::pair<AugmentKind, double> points[] = {{AugmentKind::kGaussianNoise, 0.0},
                                                     {AugmentKind::kPointDropout, 0.0},
                                                     {AugmentKind::kGlobalShift, 0.0},
                                                     {AugmentKind::kRotation, 8.0}};
    for (const auto& [kind, mag] : points) {
      const std::vector<double> grid{mag};
      const auto r = robustness_sweep(model, test, stats, kind, grid, 7);
      const RunMetrics& got = r.at(0).metrics;
      v.require(got.mcc == clean.mcc && got.accuracy == clean.accuracy &&
                    got.roc_auc == clean.roc_auc,
                std::string(to_string(model.kind)) + " " + std::string(to_string(kind)) +
                    " identity");
      ++identities;
    }
  }

  const std::set<double> batches = numeric_set(csv_column(repro / "sweep_batch.csv", "batch_size"));
  v.require(batches == std::set<double>{1, 2, 4, 8, 16, 32, 64, 128}, "batch grid");
  const std::set<double> fractions =
      numeric_set(csv_column(repro / "sweep_fraction.csv", "fraction"));
  v.require(fractions == std::set<double>{0.25, 0.5, 0.75, 1.0}, "fraction grid");
  for (AugmentKind k : {AugmentKind::kGaussianNoise, AugmentKind::kPointDropout,
                        AugmentKind::kGlobalShift, AugmentKind::kRotation}) {
    const fs::path p = repro / ("robustness_" + std::string(to_string(k)) + ".csv");
    const std::vector<double> grid = default_grid(k);
    v.require(numeric_set(csv_column(p, "magnitude")) == std::set<double>(grid.begin(), grid.end()),
              p.filename().string() + " grid");
  }
  v.detail = std::to_string(identities) + " identity points bitwise" +
             (e2e ? " on trained models" : " on untrained models") +
             ", batch/fraction/robustness grids complete";
  return v;
}

// ---- 7: determinism --------------------------------------------------------------------

// history.csv carries wall-clock seconds in its last column; everything else
// is compared byte for byte.
std::string comparable(const fs::path& p) {
  std::string text = read_file(p);
  if (p.filename() != "history.csv") return text;
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

std::map<std::string, std::string> csv_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") {
      out[fs::relative(e.path(), root).generic_string()] = comparable(e.path());
    }
  }
  return out;
}

Verdict determinism(const fs::path& work, fs::path& first_out) {
  Verdict v;
  ReproduceConfig cfg;
  cfg.n_cases = 60;
  cfg.data_seed = 3;
  cfg.study.seeds = {1, 2};
  cfg.study.pipeline.base.max_epochs = 1;
  cfg.study.pipeline.joint_epochs = 1;
  const fs::path a = work / "repro_a", b = work / "repro_b";
  fs::remove_all(a);
  fs::remove_all(b);
  reproduce_all(cfg, a);
  reproduce_all(cfg, b);
  first_out = a;
  const auto ta = csv_tree(a), tb = csv_tree(b);
  v.require(ta.size() == tb.size(), "same file set");
  std::size_t top = 0, differing = 0;
  for (const auto& [name, text] : ta) {
    if (name.find('/') == std::string::npos) ++top;
    const auto it = tb.find(name);
    if (it == tb.end() || it->second != text) {
      ++differing;
      v.require(false, name + " differs");
    }
  }
  v.require(top >= 10, "reproduce-all wrote its tables");
  v.detail = std::to_string(ta.size()) + " CSV files (" + std::to_string(top) +
             " top-level) identical across two runs";
  return v;
}

// ---- 8: round-trips ----------------------------------------------------------------------

Verdict round_trips(const fs::path& work) {
  Verdict v;
  GeneratorConfig g;
  g.n_cases = 80;
  g.positive_fraction = 0.25;
  g.seed = 31;
  const Dataset data = generate_synthetic(g);
  const fs::path csv = work / "roundtrip.csv";
  write_csv(data, csv);
  const Dataset back = parse_csv(csv);
  bool same = back.size() == data.size();
  for (std::size_t i = 0; same && i < data.size(); ++i) {
    same = back[i].id == data[i].id && back[i].label == data[i].label &&
           back[i].temps == data[i].temps;
  }
  v.require(same, "dataset CSV round-trip");

  const NormStats stats = fit_normalization(data);
  const std::vector<Features> x = normalize_all(data, stats);
  for (ModelKind k : kAllModelKinds) {
    Checkpoint c;
    c.model = make_model(k, 12);
    Rng rng(static_cast<std::uint64_t>(k) + 40);
    for (auto& [name, p] : c.model.params) {
      for (double& val : p.values()) val += 0.01 * rng.normal();
    }
    c.norm = stats;
    c.seed = 12;
    const fs::path path = work / ("roundtrip_" + std::string(to_string(k)) + ".json");
    save_checkpoint(c, path);
    const Checkpoint r = load_checkpoint(path, k);
    const auto before = predict(c.model, x, true);
    const auto after = predict(r.model, normalize_all(data, r.norm), true);
    v.require(before.scores == after.scores, std::string(to_string(k)) + " scores bitwise");
    v.require(before.embeddings == after.embeddings,
              std::string(to_string(k)) + " embeddings bitwise");
    v.require(r.model.params == c.model.params, std::string(to_string(k)) + " parameters");
  }
  v.detail = "80-case CSV and 5 checkpoints reproduce data and outputs bitwise";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string work_dir = (fs::temp_directory_path() / "scmwr_acceptance").string();
  std::vector<int> only;
  app.add_option("--work-dir", work_dir)->capture_default_str();
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const fs::path work(work_dir);
  fs::create_directories(work);
  auto wanted = [&](int n) { return only.empty() || std::ranges::count(only, n) > 0; };

  static const char* names[] = {"",
                                "gradient correctness",
                                "exact symmetries",
                                "metric oracles",
                                "protocol fidelity",
                                "synthetic end-to-end",
                                "augmentation identities and sweep grids",
                                "determinism",
                                "round-trips"};
  int failed = 0;
  auto report = [&](int n, const std::function<Verdict()>& run) {
    if (!wanted(n)) return;
    std::cerr << "criterion " << n << ": " << names[n] << '\n';
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.ok;
    std::cout << (v.ok ? "PASS " : "FAIL ") << n << ' ' << names[n] << ": " << v.detail
              << std::endl;
  };

  EndToEnd e2e;
  bool have_e2e = false;
  fs::path repro;
  report(1, gradients);
  report(2, symmetries);
  report(3, metric_oracles);
  report(4, [&] { return protocol(work); });
  report(5, [&] {
    Verdict v = end_to_end(work, e2e);
    have_e2e = e2e.runs.size() == 5;
    return v;
  });
  // 6 reads the sweep CSVs that 7 produces, so 7 runs first when both are wanted.
  Verdict det;
  if (wanted(6) || wanted(7)) {
    try {
      det = determinism(work, repro);
    } catch (const std::exception& e) {
      det.ok = false;
      det.detail = std::string("exception: ") + e.what();
    }
  }
  report(6, [&] {
    if (repro.empty()) throw std::runtime_error("reproduce-all output unavailable");
    return augmentation(have_e2e ? &e2e : nullptr, repro);
  });
  report(7, [&] { return det; });
  report(8, [&] { return round_trips(work); });
  return failed == 0 ? 0 : 1;
}
