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

#include "scmwr/robustness.h"

#include <sstream>

#include "scmwr/io.h"

namespace scmwr {

std::vector<double> default_grid(AugmentKind kind) {
  std::vector<double> g;
  switch (kind) {
    case AugmentKind::kGaussianNoise:
      for (int i = 0; i <= 10; ++i) g.push_back(i * 0.05);
      break;
    case AugmentKind::kPointDropout:
      for (int i = 0; i <= 5; ++i) g.push_back(i * 0.1);
      break;
    case AugmentKind::kGlobalShift:
      for (int i = -4; i <= 4; ++i) g.push_back(i * 0.5);
      break;
    case AugmentKind::kRotation:
      for (int k = 1; k <= 8; ++k) g.push_back(k);
      break;
  }
  return g;
}

std::vector<SweepPoint> robustness_sweep(const ModelBundle& model, std::span<const MwrExam> test,
                                         const NormStats& stats, AugmentKind kind,
                                         std::span<const double> grid, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(test.size());
  for (const MwrExam& e : test) labels.push_back(e.label);
  const Rng root(seed);
  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    AugmentationSpec spec{kind, grid[i], root.split(i).next_u64()};
    spec.validate();
    const std::vector<Features> x = augmented_features(test, stats, spec);
    const Predictions p = predict(model, x);
    out.push_back({spec, evaluate_scores(p.scores, labels)});
  }
  return out;
}

std::string sweep_to_csv(std::span<const SweepPoint> points) {
  std::ostringstream os;
  os << "kind,magnitude,mcc,accuracy,roc_auc\n";
  for (const SweepPoint& p : points) {
    os << to_string(p.spec.kind) << ',' << format_double(p.spec.magnitude) << ','
       << format_double(p.metrics.mcc) << ',' << format_double(p.metrics.accuracy) << ','
       << format_double(p.metrics.roc_auc) << '\n';
  }
  return os.str();
}

}  // namespace scmwr
