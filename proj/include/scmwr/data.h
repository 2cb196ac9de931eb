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

// MWR exam data model and everything that turns raw exams into model inputs.
//
// Canonical feature order (also the CSV column order after id,label and the
// base model's input layout):
//   [ 0..9 ]  left skin,      points 0-9
//   [10..19]  left internal,  points 0-9
//   [20..29]  right skin,     points 0-9
//   [30..39]  right internal, points 0-9
//   [40..43]  T1 skin, T1 internal, T2 skin, T2 internal
// Point 0 is the nipple, 1-8 the ring around it (in order), 9 the axillary
// site. T1/T2 are the chest reference sites.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scmwr/rng.h"

namespace scmwr {

inline constexpr std::size_t kNumFeatures = 44;
inline constexpr std::size_t kNumSites = 22;
inline constexpr std::size_t kPointsPerSide = 10;
inline constexpr std::size_t kRingPoints = 8;
inline constexpr std::size_t kAxillaryPoint = 9;
inline constexpr std::size_t kLocalPointsPerSide = 9;  // nipple + ring
inline constexpr std::size_t kLocalInputs = 2 * kLocalPointsPerSide;
inline constexpr std::size_t kRegionalWidth = 24;

inline constexpr double kMinPlausibleTemp = 20.0;
inline constexpr double kMaxPlausibleTemp = 45.0;

enum class Side { kLeft = 0, kRight = 1 };
enum class Mode { kSkin = 0, kInternal = 1 };

constexpr std::size_t feature_index(Side side, Mode mode, std::size_t point) {
  return 20 * static_cast<std::size_t>(side) + 10 * static_cast<std::size_t>(mode) + point;
}
// Reference index: ref 0 = T1, ref 1 = T2.
constexpr std::size_t reference_index(std::size_t ref, Mode mode) {
  return 40 + 2 * ref + static_cast<std::size_t>(mode);
}

using Features = std::array<double, kNumFeatures>;

struct MwrExam {
  std::string id;
  int label = 0;  // 0 healthy, 1 cancer
  Features temps{};

  bool operator==(const MwrExam&) const = default;
};

using Dataset = std::vector<MwrExam>;

std::size_t count_positive(std::span<const MwrExam> data);

// ---- CSV ---------------------------------------------------------------------

// id,label,l_skin_0..l_skin_9,l_int_0..l_int_9,r_skin_0..r_skin_9,
// r_int_0..r_int_9,t1_skin,t1_int,t2_skin,t2_int
const std::vector<std::string>& csv_header();

// Throws DataError naming row and column on any schema/domain violation.
Dataset parse_csv(std::istream& in, std::string_view source = "<stream>");
Dataset parse_csv(const std::filesystem::path& path);
// Values are written in shortest round-trip form, so parse(write(d)) == d.
void write_csv(std::span<const MwrExam> data, std::ostream& out);
void write_csv(std::span<const MwrExam> data, const std::filesystem::path& path);

// ---- synthetic generator -------------------------------------------------------

struct TumorModel {
  double amplitude_min = 0.8;  // internal-temperature elevation, deg C
  double amplitude_max = 2.5;
  double spill = 0.5;          // fraction of amplitude at the two ring neighbours
  double skin_coupling = 0.4;  // skin elevation / internal elevation
};

struct GeneratorConfig {
  std::size_t n_cases = 4932;
  double positive_fraction = 548.0 / 4932.0;
  double skin_baseline = 33.5;
  double internal_baseline = 36.8;
  double sigma_case = 0.5;   // per-case common offset, all sites
  double sigma_sym = 0.15;   // per-site physiological left/right jitter
  double sigma_meas = 0.2;   // device accuracy
  TumorModel tumor;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

void to_json(nlohmann::json& j, const GeneratorConfig& c);
void from_json(const nlohmann::json& j, GeneratorConfig& c);

struct TumorTruth {
  bool present = false;
  Side side = Side::kLeft;
  std::size_t point = 0;
  double amplitude = 0.0;
};

struct SyntheticData {
  Dataset exams;
  std::vector<TumorTruth> truth;
};

// Healthy exam: fixed per-site anatomy + per-case offset + per-site jitter
// N(0, sigma_sym^2) + measurement noise N(0, sigma_meas^2). Cancer exams add a
// hotspot on a uniformly drawn side and point 0-8. Ring hotspots spill to
// their two ring neighbours; a nipple hotspot has none. Exactly
// round(n_cases * positive_fraction) exams are positive.
SyntheticData generate_synthetic_with_truth(const GeneratorConfig& config);
Dataset generate_synthetic(const GeneratorConfig& config);

// ---- splitting -----------------------------------------------------------------

struct Splits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Per-class shuffled partition. Each class contributes round(0.6 n_c) to
// train and round(0.2 n_c) to val; the rest goes to test. Throws
// std::invalid_argument when a class has fewer than 5 members.
Splits stratified_split(std::span<const MwrExam> data, std::uint64_t seed,
                        double train_fraction = 0.6, double val_fraction = 0.2);

// Class-stratified subset with round(fraction n_c) members per class. For a
// fixed seed the subsets are nested: a smaller fraction always selects a
// prefix of the same per-class permutation.
Dataset subsample_fraction(std::span<const MwrExam> train, double fraction, std::uint64_t seed);

// ---- normalization ---------------------------------------------------------------

inline constexpr double kStdFloor = 1e-8;

struct NormStats {
  Features mean{};
  Features std{};  // population std, floored at kStdFloor
};

void to_json(nlohmann::json& j, const NormStats& s);
void from_json(const nlohmann::json& j, NormStats& s);

NormStats fit_normalization(std::span<const MwrExam> train);
Features apply_normalization(const Features& raw, const NormStats& stats);
std::vector<Features> normalize_all(std::span<const MwrExam> data, const NormStats& stats);

// ---- layouts -------------------------------------------------------------------

using LocalLayout = std::array<std::array<double, 2>, kLocalInputs>;
using RegionalVector = std::array<double, kRegionalWidth>;

// Exchanges the left and right point blocks and T1 with T2. An involution.
Features breast_swap(const Features& f);

const Features& layout_base(const Features& f);
// 18 (skin, internal) pairs: left points 0-8, then right points 0-8.
LocalLayout layout_local(const Features& f);
// Per side: skin 0-9, internal 0-9, then T1 skin, T1 int, T2 skin, T2 int.
std::pair<RegionalVector, RegionalVector> layout_regional(const Features& f);
// (f, breast_swap(f)).
std::pair<Features, Features> layout_global(const Features& f);

// ---- augmentations ---------------------------------------------------------------

enum class AugmentKind { kGaussianNoise, kPointDropout, kGlobalShift, kRotation };

std::string_view to_string(AugmentKind kind);
AugmentKind parse_augment_kind(std::string_view name);

struct AugmentationSpec {
  AugmentKind kind = AugmentKind::kGaussianNoise;
  // sigma (normalized units), dropout rate, shift in deg C, or rotation steps.
  double magnitude = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Raw-space transforms (dropout, shift, rotation). Noise is the identity here.
MwrExam augment_raw(const MwrExam& exam, const AugmentationSpec& spec, Rng& rng);
// Normalized-space transform (noise). Other kinds are the identity here.
Features augment_normalized(const Features& f, const AugmentationSpec& spec, Rng& rng);

// Applies spec to every exam and returns normalized features. Exam i draws
// from Rng(spec.seed).split(i), so results do not depend on batch order.
std::vector<Features> augmented_features(std::span<const MwrExam> data, const NormStats& stats,
                                         const AugmentationSpec& spec);

}  // namespace scmwr
