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

#include "scmwr/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scmwr/errors.h"
#include "scmwr/io.h"

namespace scmwr {

std::size_t count_positive(std::span<const MwrExam> data) {
  return static_cast<std::size_t>(
      std::count_if(data.begin(), data.end(), [](const MwrExam& e) { return e.label == 1; }));
}

// ---- CSV ---------------------------------------------------------------------

const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> header = [] {
    std::vector<std::string> h{"id", "label"};
    for (const char* side : {"l", "r"}) {
      for (const char* mode : {"skin", "int"}) {
        for (int p = 0; p < 10; ++p) {
          h.push_back(std::string(side) + "_" + mode + "_" + std::to_string(p));
        }
      }
    }
    for (const char* col : {"t1_skin", "t1_int", "t2_skin", "t2_int"}) h.emplace_back(col);
    return h;
  }();
  return header;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void fail(std::string_view source, std::size_t row, std::string_view column,
                       const std::string& what) {
  std::ostringstream os;
  os << source << ": row " << row;
  if (!column.empty()) os << ", column '" << column << "'";
  os << ": " << what;
  throw DataError(os.str());
}

}  // namespace

Dataset parse_csv(std::istream& in, std::string_view source) {
  const auto& header = csv_header();
  std::string line;
  if (!std::getline(in, line)) fail(source, 1, "", "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto head = split_fields(line);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c >= head.size()) fail(source, 1, header[c], "missing column");
    if (head[c] != header[c]) {
      fail(source, 1, header[c], "unexpected header field '" + std::string(head[c]) + "'");
    }
  }
  if (head.size() > header.size()) fail(source, 1, head[header.size()], "unexpected extra column");

  Dataset out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() < header.size()) fail(source, row, header[fields.size()], "missing column");
    if (fields.size() > header.size()) fail(source, row, "", "too many fields");

    MwrExam exam;
    exam.id = std::string(fields[0]);
    if (exam.id.empty()) fail(source, row, "id", "empty id");
    if (fields[1] == "0") {
      exam.label = 0;
    } else if (fields[1] == "1") {
      exam.label = 1;
    } else {
      fail(source, row, "label", "label must be 0 or 1, got '" + std::string(fields[1]) + "'");
    }
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      const std::string_view cell = fields[f + 2];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        fail(source, row, header[f + 2], "non-numeric value '" + std::string(cell) + "'");
      }
      if (!(v >= kMinPlausibleTemp && v <= kMaxPlausibleTemp)) {
        fail(source, row, header[f + 2],
             "temperature " + std::string(cell) + " outside plausible range [20, 45]");
      }
      exam.temps[f] = v;
    }
    out.push_back(std::move(exam));
  }
  return out;
}

Dataset parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return parse_csv(in, path.string());
}

void write_csv(std::span<const MwrExam> data, std::ostream& out) {
  const auto& header = csv_header();
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const MwrExam& e : data) {
    out << e.id << ',' << e.label;
    for (double v : e.temps) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_csv(std::span<const MwrExam> data, const std::filesystem::path& path) {
  std::ostringstream os;
  write_csv(data, os);
  write_file_atomic(path, os.str());
}

// ---- generator ---------------------------------------------------------------

void GeneratorConfig::validate() const {
  auto require = [](bool ok, const char* field, const std::string& why) {
    if (!ok) throw std::invalid_argument(std::string(field) + ": " + why);
  };
  require(n_cases >= 10, "n_cases", "must be at least 10");
  require(positive_fraction >= 0.0 && positive_fraction <= 1.0, "positive_fraction",
          "must lie in [0, 1]");
  require(sigma_case >= 0.0, "sigma_case", "must be non-negative");
  require(sigma_sym >= 0.0, "sigma_sym", "must be non-negative");
  require(sigma_meas >= 0.0, "sigma_meas", "must be non-negative");
  require(tumor.amplitude_min >= 0.0 && tumor.amplitude_max >= tumor.amplitude_min,
          "amplitude", "need 0 <= amplitude_min <= amplitude_max");
  require(tumor.spill >= 0.0 && tumor.spill <= 1.0, "spill", "must lie in [0, 1]");
  require(tumor.skin_coupling >= 0.0, "skin_coupling", "must be non-negative");
}

void to_json(nlohmann::json& j, const GeneratorConfig& c) {
  j = nlohmann::json{{"n_cases", c.n_cases},
                     {"positive_fraction", c.positive_fraction},
                     {"skin_baseline", c.skin_baseline},
                     {"internal_baseline", c.internal_baseline},
                     {"sigma_case", c.sigma_case},
                     {"sigma_sym", c.sigma_sym},
                     {"sigma_meas", c.sigma_meas},
                     {"amplitude_min", c.tumor.amplitude_min},
                     {"amplitude_max", c.tumor.amplitude_max},
                     {"spill", c.tumor.spill},
                     {"skin_coupling", c.tumor.skin_coupling},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, GeneratorConfig& c) {
  GeneratorConfig d;
  c.n_cases = j.value("n_cases", d.n_cases);
  c.positive_fraction = j.value("positive_fraction", d.positive_fraction);
  c.skin_baseline = j.value("skin_baseline", d.skin_baseline);
  c.internal_baseline = j.value("internal_baseline", d.internal_baseline);
  c.sigma_case = j.value("sigma_case", d.sigma_case);
  c.sigma_sym = j.value("sigma_sym", d.sigma_sym);
  c.sigma_meas = j.value("sigma_meas", d.sigma_meas);
  c.tumor.amplitude_min = j.value("amplitude_min", d.tumor.amplitude_min);
  c.tumor.amplitude_max = j.value("amplitude_max", d.tumor.amplitude_max);
  c.tumor.spill = j.value("spill", d.tumor.spill);
  c.tumor.skin_coupling = j.value("skin_coupling", d.tumor.skin_coupling);
  c.seed = j.value("seed", d.seed);
}

namespace {

// Fixed anatomical offsets from the mode baseline, per point 0-9: the nipple
// runs cooler, the axillary site warmer.
constexpr std::array<double, kPointsPerSide> kSkinPointOffset = {
    -0.6, -0.1, 0.0, 0.1, 0.0, -0.1, 0.0, 0.1, 0.0, 0.5};
constexpr std::array<double, kPointsPerSide> kInternalPointOffset = {
    -0.3, 0.0, 0.05, 0.1, 0.05, 0.0, 0.05, 0.1, 0.05, 0.3};
constexpr double kRefSkinOffset = 0.2;
constexpr double kRefInternalOffset = 0.1;

// Ring neighbours of ring point p (1-8), cyclic.
std::pair<std::size_t, std::size_t> ring_neighbours(std::size_t p) {
  const std::size_t prev = p == 1 ? kRingPoints : p - 1;
  const std::size_t next = p == kRingPoints ? 1 : p + 1;
  return {prev, next};
}

}  // namespace

SyntheticData generate_synthetic_with_truth(const GeneratorConfig& config) {
  config.validate();
  const std::size_t n = config.n_cases;
  const auto n_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * config.positive_fraction));

  Rng root(config.seed);
  std::vector<int> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  Rng label_rng = root.split(0);
  label_rng.shuffle(std::span<int>(labels));

  SyntheticData out;
  out.exams.reserve(n);
  out.truth.reserve(n);
  const std::size_t width = std::to_string(n).size();
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = root.split(i + 1);
    MwrExam exam;
    std::string num = std::to_string(i + 1);
    exam.id = "case_" + std::string(width - std::min(width, num.size()), '0') + num;
    exam.label = labels[i];

    const double case_offset = rng.normal(0.0, config.sigma_case);
    for (Side side : {Side::kLeft, Side::kRight}) {
      for (std::size_t p = 0; p < kPointsPerSide; ++p) {
        exam.temps[feature_index(side, Mode::kSkin, p)] =
            config.skin_baseline + kSkinPointOffset[p] + case_offset;
        exam.temps[feature_index(side, Mode::kInternal, p)] =
            config.internal_baseline + kInternalPointOffset[p] + case_offset;
      }
    }
    for (std::size_t ref = 0; ref < 2; ++ref) {
      exam.temps[reference_index(ref, Mode::kSkin)] =
          config.skin_baseline + kRefSkinOffset + case_offset;
      exam.temps[reference_index(ref, Mode::kInternal)] =
          config.internal_baseline + kRefInternalOffset + case_offset;
    }

    TumorTruth truth;
    if (exam.label == 1) {
      truth.present = true;
      truth.side = rng.below(2) == 0 ? Side::kLeft : Side::kRight;
      truth.point = static_cast<std::size_t>(rng.below(kLocalPointsPerSide));
      truth.amplitude = rng.uniform(config.tumor.amplitude_min, config.tumor.amplitude_max);
      auto elevate = [&](std::size_t point, double internal_rise) {
        exam.temps[feature_index(truth.side, Mode::kInternal, point)] += internal_rise;
        exam.temps[feature_index(truth.side, Mode::kSkin, point)] +=
            config.tumor.skin_coupling * internal_rise;
      };
      elevate(truth.point, truth.amplitude);
      if (truth.point >= 1) {
        const auto [prev, next] = ring_neighbours(truth.point);
        elevate(prev, config.tumor.spill * truth.amplitude);
        elevate(next, config.tumor.spill * truth.amplitude);
      }
    }

    // Per-site jitter and device noise. Zero sigmas leave values untouched so
    // the noiseless generator is exactly symmetric.
    for (double& t : exam.temps) {
      if (config.sigma_sym > 0.0) t += rng.normal(0.0, config.sigma_sym);
      if (config.sigma_meas > 0.0) t += rng.normal(0.0, config.sigma_meas);
    }
    out.exams.push_back(std::move(exam));
    out.truth.push_back(truth);
  }
  return out;
}

Dataset generate_synthetic(const GeneratorConfig& config) {
  return generate_synthetic_with_truth(config).exams;
}

// ---- splitting -----------------------------------------------------------------

namespace {

std::array<std::vector<std::size_t>, 2> indices_by_class(std::span<const MwrExam> data) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class[data[i].label == 1 ? 1 : 0].push_back(i);
  }
  return by_class;
}

std::size_t rounded(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

Splits stratified_split(std::span<const MwrExam> data, std::uint64_t seed, double train_fraction,
                        double val_fraction) {
  if (train_fraction <= 0.0 || val_fraction < 0.0 || train_fraction + val_fraction >= 1.0) {
    throw std::invalid_argument("stratified_split: fractions must satisfy 0 < train, "
                                "0 <= val, train + val < 1");
  }
  auto by_class = indices_by_class(data);
  Rng root(seed);
  std::array<std::vector<std::size_t>, 3> parts;
  for (std::size_t c = 0; c < 2; ++c) {
    auto& idx = by_class[c];
    if (idx.size() < 5) {
      throw std::invalid_argument("stratified_split: class " + std::to_string(c) + " has only " +
                                  std::to_string(idx.size()) + " members (need >= 5)");
    }
    Rng rng = root.split(c);
    rng.shuffle(std::span<std::size_t>(idx));
    const std::size_t n_train = rounded(train_fraction, idx.size());
    const std::size_t n_val = rounded(val_fraction, idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::size_t part = k < n_train ? 0 : (k < n_train + n_val ? 1 : 2);
      parts[part].push_back(idx[k]);
    }
  }
  Splits out;
  Dataset* dest[3] = {&out.train, &out.val, &out.test};
  for (std::size_t p = 0; p < 3; ++p) {
    // Keep the original dataset order inside each split.
    std::sort(parts[p].begin(), parts[p].end());
    for (std::size_t i : parts[p]) dest[p]->push_back(data[i]);
  }
  return out;
}

Dataset subsample_fraction(std::span<const MwrExam> train, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("subsample_fraction: fraction must lie in (0, 1]");
  }
  if (fraction == 1.0) return Dataset(train.begin(), train.end());
  auto by_class = indices_by_class(train);
  Rng root(seed);
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < 2; ++c) {
    auto& idx = by_class[c];
    Rng rng = root.split(c);
    rng.shuffle(std::span<std::size_t>(idx));
    const std::size_t n_keep = rounded(fraction, idx.size());
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_keep));
  }
  std::sort(keep.begin(), keep.end());
  Dataset out;
  for (std::size_t i : keep) out.push_back(train[i]);
  return out;
}

// ---- normalization ---------------------------------------------------------------

void to_json(nlohmann::json& j, const NormStats& s) {
  j = nlohmann::json{{"mean", s.mean}, {"std", s.std}};
}

void from_json(const nlohmann::json& j, NormStats& s) {
  j.at("mean").get_to(s.mean);
  j.at("std").get_to(s.std);
}

NormStats fit_normalization(std::span<const MwrExam> train) {
  if (train.empty()) throw std::invalid_argument("fit_normalization: empty training split");
  NormStats s;
  const double n = static_cast<double>(train.size());
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    double sum = 0.0;
    for (const MwrExam& e : train) sum += e.temps[f];
    const double mu = sum / n;
    double ss = 0.0;
    for (const MwrExam& e : train) ss += (e.temps[f] - mu) * (e.temps[f] - mu);
    s.mean[f] = mu;
    s.std[f] = std::max(std::sqrt(ss / n), kStdFloor);
  }
  return s;
}

Features apply_normalization(const Features& raw, const NormStats& stats) {
  Features out;
  for (std::size_t f = 0; f < kNumFeatures; ++f) out[f] = (raw[f] - stats.mean[f]) / stats.std[f];
  return out;
}

std::vector<Features> normalize_all(std::span<const MwrExam> data, const NormStats& stats) {
  std::vector<Features> out;
  out.reserve(data.size());
  for (const MwrExam& e : data) out.push_back(apply_normalization(e.temps, stats));
  return out;
}

// ---- layouts -------------------------------------------------------------------

Features breast_swap(const Features& f) {
  Features out;
  for (Mode mode : {Mode::kSkin, Mode::kInternal}) {
    for (std::size_t p = 0; p < kPointsPerSide; ++p) {
      out[feature_index(Side::kLeft, mode, p)] = f[feature_index(Side::kRight, mode, p)];
      out[feature_index(Side::kRight, mode, p)] = f[feature_index(Side::kLeft, mode, p)];
    }
    out[reference_index(0, mode)] = f[reference_index(1, mode)];
    out[reference_index(1, mode)] = f[reference_index(0, mode)];
  }
  return out;
}

const Features& layout_base(const Features& f) { return f; }

LocalLayout layout_local(const Features& f) {
  LocalLayout out;
  std::size_t k = 0;
  for (Side side : {Side::kLeft, Side::kRight}) {
    for (std::size_t p = 0; p < kLocalPointsPerSide; ++p, ++k) {
      out[k] = {f[feature_index(side, Mode::kSkin, p)], f[feature_index(side, Mode::kInternal, p)]};
    }
  }
  return out;
}

std::pair<RegionalVector, RegionalVector> layout_regional(const Features& f) {
  auto side_vector = [&f](Side side) {
    RegionalVector v;
    std::size_t k = 0;
    for (Mode mode : {Mode::kSkin, Mode::kInternal}) {
      for (std::size_t p = 0; p < kPointsPerSide; ++p) v[k++] = f[feature_index(side, mode, p)];
    }
    for (std::size_t ref = 0; ref < 2; ++ref) {
      v[k++] = f[reference_index(ref, Mode::kSkin)];
      v[k++] = f[reference_index(ref, Mode::kInternal)];
    }
    return v;
  };
  return {side_vector(Side::kLeft), side_vector(Side::kRight)};
}

std::pair<Features, Features> layout_global(const Features& f) { return {f, breast_swap(f)}; }

// ---- augmentations ---------------------------------------------------------------

std::string_view to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::kGaussianNoise: return "noise";
    case AugmentKind::kPointDropout: return "dropout";
    case AugmentKind::kGlobalShift: return "shift";
    case AugmentKind::kRotation: return "rotation";
  }
  return "?";
}

AugmentKind parse_augment_kind(std::string_view name) {
  for (AugmentKind k : {AugmentKind::kGaussianNoise, AugmentKind::kPointDropout,
                        AugmentKind::kGlobalShift, AugmentKind::kRotation}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown augmentation '" + std::string(name) + "'");
}

void AugmentationSpec::validate() const {
  switch (kind) {
    case AugmentKind::kGaussianNoise:
      if (!(magnitude >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
      break;
    case AugmentKind::kPointDropout:
      if (!(magnitude >= 0.0 && magnitude <= 1.0)) {
        throw std::invalid_argument("dropout rate must lie in [0, 1]");
      }
      break;
    case AugmentKind::kGlobalShift:
      if (!std::isfinite(magnitude)) throw std::invalid_argument("shift must be finite");
      break;
    case AugmentKind::kRotation:
      if (magnitude != std::floor(magnitude) || magnitude < 1.0 || magnitude > 8.0) {
        throw std::invalid_argument("rotation steps must be an integer in 1..8");
      }
      break;
  }
}

namespace {

// Feature index of measurement site s (0-9 left, 10-19 right, 20 T1, 21 T2).
std::size_t site_feature(std::size_t site, Mode mode) {
  if (site < 10) return feature_index(Side::kLeft, mode, site);
  if (site < 20) return feature_index(Side::kRight, mode, site - 10);
  return reference_index(site - 20, mode);
}

}  // namespace

MwrExam augment_raw(const MwrExam& exam, const AugmentationSpec& spec, Rng& rng) {
  spec.validate();
  MwrExam out = exam;
  switch (spec.kind) {
    case AugmentKind::kGaussianNoise:
      break;
    case AugmentKind::kGlobalShift:
      if (spec.magnitude != 0.0) {
        for (double& t : out.temps) t += spec.magnitude;
      }
      break;
    case AugmentKind::kRotation: {
      const auto k = static_cast<std::size_t>(spec.magnitude);
      for (Side side : {Side::kLeft, Side::kRight}) {
        for (Mode mode : {Mode::kSkin, Mode::kInternal}) {
          for (std::size_t p = 1; p <= kRingPoints; ++p) {
            const std::size_t dest = 1 + (p - 1 + k) % kRingPoints;
            out.temps[feature_index(side, mode, dest)] = exam.temps[feature_index(side, mode, p)];
          }
        }
      }
      break;
    }
    case AugmentKind::kPointDropout: {
      std::array<bool, kNumSites> dropped{};
      std::size_t n_dropped = 0;
      for (std::size_t s = 0; s < kNumSites; ++s) {
        dropped[s] = rng.bernoulli(spec.magnitude);
        n_dropped += dropped[s];
      }
      if (n_dropped == 0) break;
      for (Mode mode : {Mode::kSkin, Mode::kInternal}) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t s = 0; s < kNumSites; ++s) {
          if (n_dropped == kNumSites || !dropped[s]) {
            sum += exam.temps[site_feature(s, mode)];
            ++count;
          }
        }
        const double fill = sum / static_cast<double>(count);
        for (std::size_t s = 0; s < kNumSites; ++s) {
          if (dropped[s]) out.temps[site_feature(s, mode)] = fill;
        }
      }
      break;
    }
  }
  return out;
}

Features augment_normalized(const Features& f, const AugmentationSpec& spec, Rng& rng) {
  spec.validate();
  if (spec.kind != AugmentKind::kGaussianNoise || spec.magnitude == 0.0) return f;
  Features out = f;
  for (double& v : out) v += rng.normal(0.0, spec.magnitude);
  return out;
}

std::vector<Features> augmented_features(std::span<const MwrExam> data, const NormStats& stats,
                                         const AugmentationSpec& spec) {
  spec.validate();
  Rng root(spec.seed);
  std::vector<Features> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    Rng rng = root.split(i);
    const MwrExam raw = augment_raw(data[i], spec, rng);
    out.push_back(augment_normalized(apply_normalization(raw.temps, stats), spec, rng));
  }
  return out;
}

}  // namespace scmwr
