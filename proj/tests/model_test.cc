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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gtest/gtest.h"
#include "scmwr/checkpoint.h"
#include "scmwr/errors.h"
#include "scmwr/grad_check.h"
#include "scmwr/io.h"
#include "scmwr/losses.h"
#include "scmwr/model.h"

namespace scmwr {
namespace {

using ad::Matrix;
using ad::Tape;
using ad::Tensor;

std::vector<Features> random_features(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Features> out(n);
  for (Features& f : out) {
    for (double& v : f) v = rng.normal();
  }
  return out;
}

double score_of(const ModelBundle& m, const Features& f) {
  return predict(m, std::span<const Features>(&f, 1)).scores[0];
}

TEST(ModelTest, ParameterCountsArePinned) {
  EXPECT_EQ(make_model(ModelKind::kBase, 1).parameter_count(), 542209u);
  EXPECT_EQ(make_model(ModelKind::kLocal, 1).parameter_count(), 34564u);
  EXPECT_EQ(make_model(ModelKind::kRegional, 1).parameter_count(), 602627u);
  EXPECT_EQ(make_model(ModelKind::kGlobal, 1).parameter_count(), 607747u);
  EXPECT_EQ(make_model(ModelKind::kJoint, 1).parameter_count(), 1244948u);
}

TEST(ModelTest, InitializationRules) {
  const ModelBundle m = make_model(ModelKind::kRegional, 4);
  for (const auto& [name, p] : m.params) {
    if (name.ends_with(".b") || name.ends_with(".beta") || name.ends_with("threshold")) {
      for (double v : p.values()) EXPECT_EQ(v, 0.0) << name;
    } else if (name.ends_with(".gamma")) {
      for (double v : p.values()) EXPECT_EQ(v, 1.0) << name;
    } else {
      const double limit = std::sqrt(6.0 / static_cast<double>(p.rows() + p.cols()));
      for (double v : p.values()) EXPECT_LE(std::fabs(v), limit) << name;
    }
  }
  EXPECT_EQ(make_model(ModelKind::kRegional, 4).params, m.params);
  EXPECT_NE(make_model(ModelKind::kRegional, 5).params, m.params);
}

TEST(ModelTest, KindNames) {
  for (ModelKind k : kAllModelKinds) EXPECT_EQ(parse_model_kind(to_string(k)), k);
  EXPECT_EQ(display_name(ModelKind::kJoint), "J-MWR");
  EXPECT_THROW(parse_model_kind("cnn"), ConfigError);
}

TEST(MwrBlockTest, ZeroWeightsAndZeroInputGiveZero) {
  ParamMap params = make_model(ModelKind::kBase, 1).params;
  for (auto& [name, p] : params) {
    if (name.starts_with("base.block0.fc")) std::fill(p.values().begin(), p.values().end(), 0.0);
  }
  Tape tape;
  ParamBinder binder(tape, params);
  Tensor y = mwr_block_forward(binder, "base.block0", tape.constant(Matrix(1, 256)));
  for (double v : y.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(MwrBlockTest, OutputMinusInputIsInnerBranch) {
  const ParamMap params = make_model(ModelKind::kLocal, 2).params;
  Tape tape;
  ParamBinder p(tape, params);
  Rng rng(3);
  Matrix xm(2, 64);
  for (double& v : xm.values()) v = rng.normal();
  Tensor x = tape.constant(xm);
  Tensor y = mwr_block_forward(p, "lmwr.block1", x);
  const std::string b = "lmwr.block1";
  Tensor h = ad::relu(ad::layer_norm(dense_forward(p, b + ".fc1", x), p(b + ".ln1.gamma"),
                                     p(b + ".ln1.beta"), arch::kLayerNormEps));
  Tensor inner = ad::relu(ad::layer_norm(dense_forward(p, b + ".fc2", h), p(b + ".ln2.gamma"),
                                         p(b + ".ln2.beta"), arch::kLayerNormEps));
  for (std::size_t i = 0; i < xm.size(); ++i) {
    EXPECT_EQ(y.value()[i], xm[i] + inner.value()[i]);
  }
}

TEST(MwrBlockTest, WidthMismatchIsShapeError) {
  const ParamMap params = make_model(ModelKind::kLocal, 2).params;
  Tape tape;
  ParamBinder p(tape, params);
  EXPECT_THROW(mwr_block_forward(p, "lmwr.block0", tape.constant(Matrix(1, 63))), ShapeError);
}

TEST(MwrBlockTest, GradientMatchesFiniteDifferences) {
  ParamMap params = make_model(ModelKind::kLocal, 6).params;
  Rng rng(8);
  Matrix x(3, 64);
  for (double& v : x.values()) v = rng.normal();
  std::vector<Matrix*> ps{&x};
  for (auto& [name, p] : params) {
    if (name.starts_with("lmwr.block2")) ps.push_back(&p);
  }
  ad::GradCheckOptions opt;
  opt.max_coords_per_param = 0;
  opt.kink_tolerance = 1e-7;
  opt.eps = 1e-4;  // f is O(10); smaller steps drown 1e-5 gradients in rounding
  const auto r = grad_check(
      [&](Tape& t) {
        ParamBinder p(t, params);
        Tensor y = mwr_block_forward(p, "lmwr.block2", t.parameter(x));
        return ad::sum(ad::mul(y, t.constant(Matrix(3, 64, 0.37))));
      },
      ps, opt);
  EXPECT_LT(r.max_rel_error, 1e-5) << "param " << r.worst_param << "[" << r.worst_index << "]";
  EXPECT_LT(r.skipped_kinks * 20, r.checked);
}

TEST(BaseModelTest, ProbabilityInOpenUnitIntervalAndDeterministic) {
  const ModelBundle m = make_model(ModelKind::kBase, 1);
  const auto x = random_features(20, 2);
  const auto a = predict(m, x, true);
  const auto b = predict(m, x, true);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.embeddings, b.embeddings);
  for (double s : a.scores) {
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
  EXPECT_EQ(a.embeddings[0].size(), 256u);
}

TEST(BaseModelTest, WrongInputWidthIsShapeError) {
  const ModelBundle m = make_model(ModelKind::kBase, 1);
  Tape tape;
  ParamBinder p(tape, m.params);
  EXPECT_THROW(base_forward(p, tape.constant(Matrix(1, 43))), ShapeError);
}

TEST(LocalModelTest, IdenticalInputsGiveZeroComparisonAndScore) {
  const ModelBundle m = make_model(ModelKind::kLocal, 3);
  Tape tape;
  ParamBinder p(tape, m.params);
  Matrix pts(18, 2);
  for (std::size_t i = 0; i < 18; ++i) {
    pts(i, 0) = 0.7;
    pts(i, 1) = -0.2;
  }
  const ModelOutput o = lmwr_forward(p, tape.constant(pts), m.gate);
  ASSERT_EQ(o.embedding.cols(), 153u);
  for (double v : o.embedding.value().values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(o.score.item(), 0.0);
}

TEST(LocalModelTest, PairOrderIsLexicographic) {
  const auto& pairs = local_pairs();
  ASSERT_EQ(pairs.size(), 153u);
  EXPECT_EQ(pairs[0], std::make_pair(std::size_t{0}, std::size_t{1}));
  EXPECT_EQ(pairs[16], std::make_pair(std::size_t{0}, std::size_t{17}));
  EXPECT_EQ(pairs[17], std::make_pair(std::size_t{1}, std::size_t{2}));
  EXPECT_EQ(pairs[152], std::make_pair(std::size_t{16}, std::size_t{17}));
}

TEST(LocalModelTest, PermutationInvariant) {
  ModelBundle m = make_model(ModelKind::kLocal, 3);
  m.params["lmwr.head.b"][0] = 0.05;
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix pts(18, 2);
    for (double& v : pts.values()) v = rng.normal();
    std::vector<std::size_t> perm(18);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    Matrix shuffled(18, 2);
    for (std::size_t i = 0; i < 18; ++i) {
      shuffled(i, 0) = pts(perm[i], 0);
      shuffled(i, 1) = pts(perm[i], 1);
    }
    Tape tape;
    ParamBinder p(tape, m.params);
    const double a = lmwr_forward(p, tape.constant(pts), m.gate).score.item();
    const double b = lmwr_forward(p, tape.constant(shuffled), m.gate).score.item();
    EXPECT_LT(std::fabs(a - b), 1e-9);
  }
}

TEST(LocalModelTest, WrongInputCountIsShapeError) {
  const ModelBundle m = make_model(ModelKind::kLocal, 3);
  Tape tape;
  ParamBinder p(tape, m.params);
  EXPECT_THROW(lmwr_forward(p, tape.constant(Matrix(17, 2)), m.gate), ShapeError);
  EXPECT_THROW(lmwr_forward(p, tape.constant(Matrix(18, 3)), m.gate), ShapeError);
}

TEST(RegionalModelTest, EqualSidesGiveZeroDiffAndHeadBiasScore) {
  ModelBundle m = make_model(ModelKind::kRegional, 5);
  Rng rng(1);
  Matrix side(1, 24);
  for (double& v : side.values()) v = rng.normal();
  {
    Tape tape;
    ParamBinder p(tape, m.params);
    const ModelOutput o = rmwr_forward(p, tape.constant(side), tape.constant(side), m.gate);
    for (double v : o.embedding.value().values()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(o.score.item(), 0.0);
  }
  m.params["rmwr.head.b"][0] = 0.3;
  Tape tape;
  ParamBinder p(tape, m.params);
  const ModelOutput o = rmwr_forward(p, tape.constant(side), tape.constant(side), m.gate);
  EXPECT_EQ(o.score.item(), std::tanh(0.3));
}

TEST(RegionalModelTest, ArgumentSwapSymmetric) {
  const ModelBundle m = make_model(ModelKind::kRegional, 5);
  Rng rng(2);
  Matrix l(3, 24), r(3, 24);
  for (double& v : l.values()) v = rng.normal();
  for (double& v : r.values()) v = rng.normal();
  Tape tape;
  ParamBinder p(tape, m.params);
  const Matrix a = rmwr_forward(p, tape.constant(l), tape.constant(r), m.gate).score.value();
  const Matrix b = rmwr_forward(p, tape.constant(r), tape.constant(l), m.gate).score.value();
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::fabs(a[i] - b[i]), 1e-9);
}

TEST(RegionalModelTest, WrongWidthIsShapeError) {
  const ModelBundle m = make_model(ModelKind::kRegional, 5);
  Tape tape;
  ParamBinder p(tape, m.params);
  EXPECT_THROW(rmwr_forward(p, tape.constant(Matrix(1, 23)), tape.constant(Matrix(1, 23)), m.gate),
               ShapeError);
}

TEST(RegionalModelTest, GradientThroughNormalizationAndGate) {
  ModelBundle m = make_model(ModelKind::kRegional, 5);
  m.params["rmwr.threshold"][0] = 0.01;
  Rng rng(9);
  Matrix l(2, 24), r(2, 24);
  for (double& v : l.values()) v = rng.normal();
  for (double& v : r.values()) v = rng.normal();
  std::vector<Matrix*> ps{&l, &r, &m.params["rmwr.threshold"], &m.params["rmwr.head.w"],
                          &m.params["rmwr.feature.w"], &m.params["rmwr.feature.b"]};
  ad::GradCheckOptions opt;
  opt.eps = 1e-5;
  opt.kink_tolerance = 1e-9;
  opt.max_coords_per_param = 64;
  const auto res = grad_check(
      [&](Tape& t) {
        ParamBinder p(t, m.params);
        return ad::sum(rmwr_forward(p, t.parameter(l), t.parameter(r), m.gate).score);
      },
      ps, opt);
  EXPECT_LT(res.max_rel_error, 1e-4) << "param " << res.worst_param;
  EXPECT_LT(res.skipped_kinks * 20, res.checked);
}

TEST(GlobalModelTest, SymmetricExamScoresHeadBias) {
  const ModelBundle m = make_model(ModelKind::kGlobal, 7);
  Features f = random_features(1, 3)[0];
  for (Mode mode : {Mode::kSkin, Mode::kInternal}) {
    for (std::size_t pt = 0; pt < kPointsPerSide; ++pt) {
      f[feature_index(Side::kRight, mode, pt)] = f[feature_index(Side::kLeft, mode, pt)];
    }
    f[reference_index(1, mode)] = f[reference_index(0, mode)];
  }
  EXPECT_EQ(score_of(m, f), 0.0);
}

TEST(GlobalModelTest, SwapInvariantAndDeterministic) {
  const ModelBundle m = make_model(ModelKind::kGlobal, 7);
  for (const Features& f : random_features(10, 4)) {
    const double a = score_of(m, f);
    EXPECT_LT(std::fabs(a - score_of(m, breast_swap(f))), 1e-9);
    EXPECT_EQ(a, score_of(m, f));
    EXPECT_EQ(a, score_of(m, f));
  }
}

TEST(GlobalModelTest, InconsistentSwapIsRejected) {
  auto x = random_features(2, 5);
  std::vector<Features> swapped{breast_swap(x[0]), x[1]};
  EXPECT_THROW(global_inputs(x, swapped), std::invalid_argument);
  swapped[1] = breast_swap(x[1]);
  EXPECT_NO_THROW(global_inputs(x, swapped));
}

TEST(JointModelTest, ZeroSubScoresGiveZero) {
  const ModelBundle m = make_model(ModelKind::kJoint, 9);
  Features zeros{};
  Tape tape;
  ParamBinder p(tape, m.params, false);
  const ModelInputs in = build_inputs(ModelKind::kJoint, std::span<const Features>(&zeros, 1));
  const ModelOutput o = jmwr_forward(p, in, m.gate);
  EXPECT_EQ(o.score.item(), 0.0);
  EXPECT_EQ(o.embedding.cols(), 3u);
}

TEST(JointModelTest, WeightingLayersAreScalar) {
  const ModelBundle m = make_model(ModelKind::kJoint, 9);
  for (const char* n : {"joint.w_local", "joint.w_regional", "joint.w_global"}) {
    EXPECT_EQ(m.params.at(std::string(n) + ".w").size(), 1u);
    EXPECT_EQ(m.params.at(std::string(n) + ".b").size(), 1u);
  }
  EXPECT_EQ(m.params.at("joint.head.w").rows(), 3u);
}

TEST(JointModelTest, GradientReachesAllSubModels) {
  ModelBundle m = make_model(ModelKind::kJoint, 9);
  const auto x = random_features(4, 6);
  Tape tape;
  ParamBinder p(tape, m.params);
  const ModelOutput o = forward(p, ModelKind::kJoint, build_inputs(ModelKind::kJoint, x), m.gate);
  tape.backward(ad::sum(o.score));
  std::map<std::string, double> norm;
  for (const auto& [name, leaf] : p.bound()) {
    const std::string prefix = name.substr(0, name.find('.'));
    for (double g : leaf.grad().values()) norm[prefix] += g * g;
  }
  for (const char* prefix : {"lmwr", "rmwr", "gmwr", "joint"}) {
    EXPECT_GT(norm[prefix], 0.0) << prefix;
  }
}

TEST(JointModelTest, SubModelKindsChecked) {
  const ModelBundle l = make_model(ModelKind::kLocal, 1);
  const ModelBundle r = make_model(ModelKind::kRegional, 1);
  EXPECT_THROW(make_joint(l, r, r, 1), ConfigError);
}

TEST(ModelTest, ScoresAreBounded) {
  const auto x = random_features(16, 8);
  for (ModelKind k : kAllModelKinds) {
    for (double s : predict(make_model(k, 2), x).scores) {
      if (k == ModelKind::kBase) {
        EXPECT_GT(s, 0.0);
      } else {
        EXPECT_GT(s, -1.0);
      }
      EXPECT_LT(s, 1.0);
    }
  }
}

TEST(ModelTest, PredictIsIndependentOfChunking) {
  const auto x = random_features(9, 10);
  for (ModelKind k : kAllModelKinds) {
    const ModelBundle m = make_model(k, 3);
    EXPECT_EQ(predict(m, x, true, 1).scores, predict(m, x, true, 256).scores);
    EXPECT_EQ(predict(m, x, true, 1).embeddings, predict(m, x, true, 4).embeddings);
  }
}

TEST(ModelTest, EmbeddingWidths) {
  const auto x = random_features(2, 1);
  for (ModelKind k : kAllModelKinds) {
    const ModelBundle m = make_model(k, 1);
    EXPECT_EQ(predict(m, x, true).embeddings[0].size(), m.embedding_width());
  }
  EXPECT_EQ(make_model(ModelKind::kLocal, 1).embedding_width(), 153u);
  EXPECT_EQ(make_model(ModelKind::kRegional, 1).embedding_width(), 256u);
}

TEST(ModelTest, FullModelGradientOnFourSampleBatch) {
  const auto x = random_features(4, 13);
  for (ModelKind k : kAllModelKinds) {
    ModelBundle m = make_model(k, 14);
    const ModelInputs in = build_inputs(k, x);
    std::vector<Matrix*> ps;
    for (auto& [name, p] : m.params) ps.push_back(&p);
    ad::GradCheckOptions opt;
    opt.eps = 1e-5;
    opt.kink_tolerance = 1e-9;
    opt.max_coords_per_param = 3;
    const auto r = grad_check(
        [&](Tape& t) {
          ParamBinder p(t, m.params);
          return ad::sum(forward(p, k, in, m.gate).score);
        },
        ps, opt);
    EXPECT_LT(r.max_rel_error, 1e-4) << to_string(k) << " param " << r.worst_param;
    EXPECT_LT(r.skipped_kinks * 20, r.checked) << to_string(k);
  }
}

TEST(ModelTest, BaseLossGradientOnOneSample) {
  ModelBundle m = make_model(ModelKind::kBase, 4);
  const auto x = random_features(1, 11);
  const ModelInputs in = build_inputs(ModelKind::kBase, x);
  const int label[] = {1};
  std::vector<Matrix*> ps;
  for (auto& [name, p] : m.params) ps.push_back(&p);
  ad::GradCheckOptions opt;
  opt.max_coords_per_param = 6;
  opt.kink_tolerance = 1e-7;
  const auto r = grad_check(
      [&](Tape& t) {
        ParamBinder p(t, m.params);
        const ModelOutput o = forward(p, ModelKind::kBase, in, m.gate);
        return class_balanced_bce(ad::clamp(o.score, kProbClampLo, kProbClampHi), label,
                                  ClassWeights{});
      },
      ps, opt);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_param;
}

// ---- checkpoints -------------------------------------------------------------

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("scmwr_ckpt_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CheckpointTest, RoundTripReproducesForwardBitwise) {
  const auto x = random_features(10, 12);
  for (ModelKind k : kAllModelKinds) {
    ModelBundle m = make_model(k, 21);
    // Perturb so values are not just initial draws.
    Rng rng(3);
    for (auto& [name, p] : m.params) {
      for (double& v : p.values()) v += rng.normal(0.0, 1e-3);
    }
    Checkpoint c{m, fit_normalization(generate_synthetic(GeneratorConfig{.n_cases = 30})), 21,
                 {{"note", "x"}}};
    const auto path = dir_ / (std::string(to_string(k)) + ".json");
    save_checkpoint(c, path);
    const Checkpoint back = load_checkpoint(path, k);
    EXPECT_EQ(back.model.params, m.params);
    EXPECT_EQ(predict(back.model, x, true).scores, predict(m, x, true).scores);
    EXPECT_EQ(back.norm.mean, c.norm.mean);
    EXPECT_EQ(back.seed, 21u);
    EXPECT_EQ(back.config, c.config);
  }
}

TEST_F(CheckpointTest, TruncatedFileIsDataError) {
  const auto path = dir_ / "m.json";
  save_checkpoint({make_model(ModelKind::kLocal, 1), {}, 1, {}}, path);
  std::string text = read_file(path);
  std::ofstream(path, std::ios::trunc) << text.substr(0, text.size() / 2);
  EXPECT_THROW(load_checkpoint(path), DataError);
}

TEST_F(CheckpointTest, VersionAndKindChecks) {
  const auto path = dir_ / "m.json";
  const Checkpoint c{make_model(ModelKind::kLocal, 1), {}, 1, {}};
  save_checkpoint(c, path);
  EXPECT_THROW(load_checkpoint(path, ModelKind::kRegional), ConfigError);

  nlohmann::json j = checkpoint_to_json(c);
  j["version"] = 99;
  EXPECT_THROW(checkpoint_from_json(j), DataError);
  j = checkpoint_to_json(c);
  j["params"].erase("lmwr.threshold");
  EXPECT_THROW(checkpoint_from_json(j), DataError);
  j = checkpoint_to_json(c);
  j["params"]["lmwr.head.w"][0][0] = "x";
  EXPECT_THROW(checkpoint_from_json(j), DataError);
}

TEST_F(CheckpointTest, MissingFileIsConfigError) {
  EXPECT_THROW(load_checkpoint(dir_ / "nope.json"), ConfigError);
}

}  // namespace
}  // namespace scmwr
