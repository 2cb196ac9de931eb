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

// Frozen-model evaluation on augmented copies of a test split.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scmwr/data.h"
#include "scmwr/metrics.h"
#include "scmwr/model.h"

namespace scmwr {

// Noise sigma 0..0.5 step 0.05 (normalized units), dropout rate 0..0.5 step
// 0.1, shift -2..2 deg C step 0.5, rotation k = 1..8.
std::vector<double> default_grid(AugmentKind kind);

struct SweepPoint {
  AugmentationSpec spec;
  RunMetrics metrics;
};

// Grid point i uses augmentation seed Rng(seed).split(i).next_u64().
std::vector<SweepPoint> robustness_sweep(const ModelBundle& model, std::span<const MwrExam> test,
                                         const NormStats& stats, AugmentKind kind,
                                         std::span<const double> grid, std::uint64_t seed);

// kind,magnitude,mcc,accuracy,roc_auc
std::string sweep_to_csv(std::span<const SweepPoint> points);

}  // namespace scmwr
