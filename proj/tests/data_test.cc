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
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gtest/gtest.h"
#include "scmwr/data.h"
#include "scmwr/errors.h"

namespace scmwr {
namespace {

Dataset small_dataset(std::size_t n = 200, std::uint64_t seed = 3) {
  GeneratorConfig g;
  g.n_cases = n;
  g.positive_fraction = 0.25;
  g.seed = seed;
  return generate_synthetic(g);
}

std::string csv_text(const Dataset& d) {
  std::ostringstream os;
  write_csv(d, os);
  return os.str();
}

TEST(CsvTest, HeaderHas46NamedColumns) {
  const auto& h = csv_header();
  ASSERT_EQ(h.size(), 46u);
  EXPECT_EQ(h[0], "id");
  EXPECT_EQ(h[1], "label");
  EXPECT_EQ(h[2], "l_skin_0");
  EXPECT_EQ(h[12], "l_int_0");
  EXPECT_EQ(h[22], "r_skin_0");
  EXPECT_EQ(h[41], "r_int_9");
  EXPECT_EQ(h[42], "t1_skin");
  EXPECT_EQ(h[45], "t2_int");
}

TEST(CsvTest, WriteParseRoundTripIsBitwise) {
  Dataset d = small_dataset(50);
  Rng rng(5);
  // Values with long expansions.
  for (MwrExam& e : d) {
    for (double& t : e.temps) t += rng.uniform(-1e-3, 1e-3) / 3.0;
  }
  std::istringstream in(csv_text(d));
  EXPECT_EQ(parse_csv(in), d);
}

TEST(CsvTest, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "scmwr_data_test";
  std::filesystem::remove_all(dir);
  const Dataset d = small_dataset(20);
  write_csv(d, dir / "nested" / "d.csv");
  EXPECT_EQ(parse_csv(dir / "nested" / "d.csv"), d);
  std::filesystem::remove_all(dir);
}

TEST(CsvTest, BadLabelNamesRowAndColumn) {
  const Dataset d = small_dataset(12);
  std::string text = csv_text(d);
  // Second data row: replace its label with 2.
  const auto row2 = text.find('\n', text.find('\n') + 1) + 1;
  const auto comma = text.find(',', row2);
  text[comma + 1] = '2';
  std::istringstream in(text);
  try {
    parse_csv(in, "x.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("x.csv"), std::string::npos) << msg;
    EXPECT_NE(msg.find("label"), std::string::npos) << msg;
    EXPECT_NE(msg.find('3'), std::string::npos) << msg;  // line 3
  }
}

TEST(CsvTest, RejectsMalformedInput) {
  const std::string header = csv_text({}).substr(0, csv_text({}).find('\n') + 1);
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_csv(in);
  };
  std::string values;
  for (int i = 0; i < 44; ++i) values += ",36.5";
  EXPECT_NO_THROW(parse(header + "a,1" + values + "\n"));
  EXPECT_THROW(parse(header + "a,1" + values + ",1\n"), DataError);           // extra column
  EXPECT_THROW(parse(header + "a,1,36.5\n"), DataError);                      // short row
  EXPECT_THROW(parse(header + "a,1,abc" + values.substr(5) + "\n"), DataError);
  EXPECT_THROW(parse(header + "a,1,99" + values.substr(5) + "\n"), DataError);  // implausible
  EXPECT_THROW(parse("id,label\n"), DataError);                                // header
  EXPECT_THROW(parse(""), DataError);
}

TEST(GeneratorTest, DefaultCountsMatchCohort) {
  const Dataset d = generate_synthetic(GeneratorConfig{});
  EXPECT_EQ(d.size(), 4932u);
  EXPECT_EQ(count_positive(d), 548u);
}

TEST(GeneratorTest, DeterministicPerSeed) {
  EXPECT_EQ(small_dataset(100, 7), small_dataset(100, 7));
  EXPECT_NE(small_dataset(100, 7), small_dataset(100, 8));
}

TEST(GeneratorTest, ValuesArePlausible) {
  for (const MwrExam& e : generate_synthetic(GeneratorConfig{})) {
    for (double t : e.temps) {
      ASSERT_GE(t, kMinPlausibleTemp);
      ASSERT_LE(t, kMaxPlausibleTemp);
    }
  }
}

TEST(GeneratorTest, NoiselessHealthyExamsAreSymmetric) {
  GeneratorConfig g;
  g.n_cases = 20;
  g.positive_fraction = 0.0;
  g.sigma_case = g.sigma_sym = g.sigma_meas = 0.0;
  for (const MwrExam& e : generate_synthetic(g)) EXPECT_EQ(breast_swap(e.temps), e.temps);
}

TEST(GeneratorTest, InvalidConfigThrows) {
  GeneratorConfig g;
  g.positive_fraction = 1.5;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = {};
  g.n_cases = 0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = {};
  g.tumor.amplitude_min = 3.0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(GeneratorTest, HotspotExceedsContralateralByAmplitude) {
  GeneratorConfig g;
  g.n_cases = 2400;
  g.positive_fraction = 0.5;
  g.seed = 11;
  const SyntheticData s = generate_synthetic_with_truth(g);
  std::vector<double> diff;
  double amp_sum = 0.0;
  for (std::size_t i = 0; i < s.exams.size(); ++i) {
    const TumorTruth& t = s.truth[i];
    if (!t.present) continue;
    const Side other = t.side == Side::kLeft ? Side::kRight : Side::kLeft;
    diff.push_back(s.exams[i].temps[feature_index(t.side, Mode::kInternal, t.point)] -
                   s.exams[i].temps[feature_index(other, Mode::kInternal, t.point)]);
    amp_sum += t.amplitude;
  }
  ASSERT_GE(diff.size(), 1000u);
  const double n = static_cast<double>(diff.size());
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= n;
  double var = 0.0;
  for (double d : diff) var += (d - mean) * (d - mean);
  const double se = std::sqrt(var / (n - 1) / n);
  // Expected amplitude is the midpoint of the configured range.
  const double expected = (g.tumor.amplitude_min + g.tumor.amplitude_max) / 2.0;
  EXPECT_LT(std::fabs(mean - expected), 3.0 * se) << mean << " vs " << expected;
  EXPECT_LT(std::fabs(amp_sum / n - expected), 0.05);
}

TEST(GeneratorTest, ConfigJsonRoundTrip) {
  GeneratorConfig g;
  g.n_cases = 77;
  g.sigma_sym = 0.123;
  g.seed = 99;
  const nlohmann::json j = g;
  const GeneratorConfig back = j.get<GeneratorConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
}

TEST(SplitTest, DisjointExhaustiveDeterministicAndStratified) {
  const Dataset d = small_dataset(203);
  const Splits a = stratified_split(d, 42);
  const Splits b = stratified_split(d, 42);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);

  std::multiset<std::string> ids;
  for (const Dataset* part : {&a.train, &a.val, &a.test}) {
    for (const MwrExam& e : *part) ids.insert(e.id);
  }
  EXPECT_EQ(ids.size(), d.size());
  EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), d.size());

  const double pos = static_cast<double>(count_positive(d));
  const double neg = static_cast<double>(d.size()) - pos;
  auto near = [](double got, double want) { return std::fabs(got - want) <= 1.0; };
  EXPECT_TRUE(near(count_positive(a.train), 0.6 * pos));
  EXPECT_TRUE(near(a.train.size() - count_positive(a.train), 0.6 * neg));
  EXPECT_TRUE(near(count_positive(a.val), 0.2 * pos));
  EXPECT_TRUE(near(count_positive(a.test), 0.2 * pos));
  EXPECT_NE(stratified_split(d, 43).train, a.train);
}

TEST(SplitTest, TinyClassThrows) {
  GeneratorConfig g;
  g.n_cases = 40;
  g.positive_fraction = 0.1;  // 4 positives
  EXPECT_THROW(stratified_split(generate_synthetic(g), 1), std::invalid_argument);
}

TEST(SubsampleTest, FractionOneIsIdentity) {
  const Dataset d = small_dataset(60);
  EXPECT_EQ(subsample_fraction(d, 1.0, 5), d);
}

TEST(SubsampleTest, HalfOfSixtyWithSixPositives) {
  GeneratorConfig g;
  g.n_cases = 60;
  g.positive_fraction = 0.1;
  const Dataset d = generate_synthetic(g);
  ASSERT_EQ(count_positive(d), 6u);
  const Dataset half = subsample_fraction(d, 0.5, 5);
  EXPECT_EQ(half.size(), 30u);
  EXPECT_EQ(count_positive(half), 3u);
}

TEST(SubsampleTest, SubsetsAreNested) {
  const Dataset d = small_dataset(120);
  auto ids = [](const Dataset& x) {
    std::set<std::string> s;
    for (const MwrExam& e : x) s.insert(e.id);
    return s;
  };
  const auto q = ids(subsample_fraction(d, 0.25, 9));
  const auto h = ids(subsample_fraction(d, 0.5, 9));
  const auto t = ids(subsample_fraction(d, 0.75, 9));
  EXPECT_TRUE(std::includes(h.begin(), h.end(), q.begin(), q.end()));
  EXPECT_TRUE(std::includes(t.begin(), t.end(), h.begin(), h.end()));
}

TEST(SubsampleTest, NonPositiveFractionThrows) {
  const Dataset d = small_dataset(20);
  EXPECT_THROW(subsample_fraction(d, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(subsample_fraction(d, -0.5, 1), std::invalid_argument);
  EXPECT_THROW(subsample_fraction(d, 1.5, 1), std::invalid_argument);
}

TEST(NormalizationTest, TrainingSplitIsStandardized) {
  const Dataset d = small_dataset(150);
  const NormStats s = fit_normalization(d);
  const auto x = normalize_all(d, s);
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    double mean = 0.0, var = 0.0;
    for (const Features& r : x) mean += r[f];
    mean /= static_cast<double>(x.size());
    for (const Features& r : x) var += (r[f] - mean) * (r[f] - mean);
    var /= static_cast<double>(x.size());
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
}

TEST(NormalizationTest, ConstantFeatureIsFloored) {
  Dataset d = small_dataset(10);
  for (MwrExam& e : d) e.temps[5] = 33.0;
  const NormStats s = fit_normalization(d);
  EXPECT_EQ(s.std[5], kStdFloor);
  for (const Features& r : normalize_all(d, s)) EXPECT_EQ(r[5], 0.0);
}

TEST(NormalizationTest, JsonRoundTripIsBitwise) {
  const NormStats s = fit_normalization(small_dataset(30));
  const nlohmann::json j = s;
  const NormStats back = nlohmann::json::parse(j.dump()).get<NormStats>();
  EXPECT_EQ(back.mean, s.mean);
  EXPECT_EQ(back.std, s.std);
}

TEST(LayoutTest, BreastSwapIsAnInvolution) {
  for (const MwrExam& e : small_dataset(30)) {
    EXPECT_EQ(breast_swap(breast_swap(e.temps)), e.temps);
    const auto [orig, swapped] = layout_global(e.temps);
    EXPECT_EQ(orig, e.temps);
    const auto [o2, s2] = layout_global(swapped);
    EXPECT_EQ(s2, orig);
    EXPECT_EQ(swapped[feature_index(Side::kLeft, Mode::kInternal, 4)],
              e.temps[feature_index(Side::kRight, Mode::kInternal, 4)]);
    EXPECT_EQ(swapped[reference_index(0, Mode::kSkin)], e.temps[reference_index(1, Mode::kSkin)]);
  }
}

TEST(LayoutTest, LocalLayoutTakesNippleAndRingPoints) {
  Features f;
  for (std::size_t i = 0; i < kNumFeatures; ++i) f[i] = static_cast<double>(i);
  const LocalLayout l = layout_local(f);
  EXPECT_EQ(l[0][0], 0.0);    // left skin 0
  EXPECT_EQ(l[0][1], 10.0);   // left internal 0
  EXPECT_EQ(l[8][0], 8.0);
  EXPECT_EQ(l[9][0], 20.0);   // right skin 0
  EXPECT_EQ(l[17][1], 38.0);  // right internal 8
}

TEST(LayoutTest, RegionalLayoutOrder) {
  Features f;
  for (std::size_t i = 0; i < kNumFeatures; ++i) f[i] = static_cast<double>(i);
  const auto [left, right] = layout_regional(f);
  for (std::size_t k = 0; k < 20; ++k) {
    EXPECT_EQ(left[k], static_cast<double>(k));
    EXPECT_EQ(right[k], static_cast<double>(20 + k));
  }
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(left[20 + k], static_cast<double>(40 + k));
    EXPECT_EQ(right[20 + k], static_cast<double>(40 + k));
  }
}

TEST(AugmentTest, ZeroMagnitudeIsIdentity) {
  const Dataset d = small_dataset(40);
  const NormStats s = fit_normalization(d);
  const auto clean = normalize_all(d, s);
  for (AugmentKind k : {AugmentKind::kGaussianNoise, AugmentKind::kPointDropout,
                        AugmentKind::kGlobalShift}) {
    EXPECT_EQ(augmented_features(d, s, {k, 0.0, 17}), clean) << to_string(k);
  }
  EXPECT_EQ(augmented_features(d, s, {AugmentKind::kRotation, 8.0, 17}), clean);
}

TEST(AugmentTest, RotationMovesRingPoints) {
  MwrExam e;
  for (std::size_t i = 0; i < kNumFeatures; ++i) e.temps[i] = 30.0 + 0.1 * static_cast<double>(i);
  Rng rng(1);
  const MwrExam r = augment_raw(e, {AugmentKind::kRotation, 1.0, 0}, rng);
  EXPECT_EQ(r.temps[feature_index(Side::kLeft, Mode::kSkin, 2)],
            e.temps[feature_index(Side::kLeft, Mode::kSkin, 1)]);
  EXPECT_EQ(r.temps[feature_index(Side::kLeft, Mode::kSkin, 1)],
            e.temps[feature_index(Side::kLeft, Mode::kSkin, 8)]);
  EXPECT_EQ(r.temps[feature_index(Side::kRight, Mode::kInternal, 0)],
            e.temps[feature_index(Side::kRight, Mode::kInternal, 0)]);
  EXPECT_EQ(r.temps[feature_index(Side::kRight, Mode::kInternal, 9)],
            e.temps[feature_index(Side::kRight, Mode::kInternal, 9)]);
}

TEST(AugmentTest, ShiftAddsInRawSpace) {
  MwrExam e = small_dataset(1 + 9)[0];
  Rng rng(1);
  const MwrExam r = augment_raw(e, {AugmentKind::kGlobalShift, -1.5, 0}, rng);
  for (std::size_t i = 0; i < kNumFeatures; ++i) EXPECT_EQ(r.temps[i], e.temps[i] - 1.5);
}

TEST(AugmentTest, FullDropoutSetsEverySiteToModeMean) {
  const MwrExam e = small_dataset(10)[0];
  Rng rng(1);
  const MwrExam r = augment_raw(e, {AugmentKind::kPointDropout, 1.0, 0}, rng);
  for (Mode mode : {Mode::kSkin, Mode::kInternal}) {
    double sum = 0.0;
    for (std::size_t p = 0; p < kPointsPerSide; ++p) {
      sum += e.temps[feature_index(Side::kLeft, mode, p)] +
             e.temps[feature_index(Side::kRight, mode, p)];
    }
    sum += e.temps[reference_index(0, mode)] + e.temps[reference_index(1, mode)];
    const double mean = sum / static_cast<double>(kNumSites);
    EXPECT_NEAR(r.temps[feature_index(Side::kLeft, mode, 3)], mean, 1e-12);
    EXPECT_NEAR(r.temps[reference_index(1, mode)], mean, 1e-12);
  }
}

TEST(AugmentTest, PartialDropoutFillsWithRemainingMean) {
  const MwrExam e = small_dataset(10)[1];
  Rng rng(4);
  const MwrExam r = augment_raw(e, {AugmentKind::kPointDropout, 0.3, 0}, rng);
  // Changed sites share one fill value per mode; untouched sites are exact.
  std::size_t changed = 0;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (r.temps[i] != e.temps[i]) ++changed;
  }
  EXPECT_GT(changed, 0u);
  EXPECT_LT(changed, kNumFeatures);
}

TEST(AugmentTest, PerExamStreamsIgnoreBatchComposition) {
  const Dataset d = small_dataset(30);
  const NormStats s = fit_normalization(d);
  const AugmentationSpec spec{AugmentKind::kGaussianNoise, 0.3, 21};
  const auto full = augmented_features(d, s, spec);
  const auto prefix = augmented_features(std::span(d).first(10), s, spec);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(full[i], prefix[i]);
}

TEST(AugmentTest, InvalidSpecsThrow) {
  EXPECT_THROW((AugmentationSpec{AugmentKind::kGaussianNoise, -0.1, 0}.validate()),
               std::invalid_argument);
  EXPECT_THROW((AugmentationSpec{AugmentKind::kPointDropout, 1.2, 0}.validate()),
               std::invalid_argument);
  EXPECT_THROW((AugmentationSpec{AugmentKind::kRotation, 0.0, 0}.validate()),
               std::invalid_argument);
  EXPECT_THROW((AugmentationSpec{AugmentKind::kRotation, 2.5, 0}.validate()),
               std::invalid_argument);
  EXPECT_THROW(parse_augment_kind("blur"), std::invalid_argument);
}

}  // namespace
}  // namespace scmwr
