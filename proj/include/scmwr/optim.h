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

// Adam and the plateau learning-rate schedule.

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <string_view>

#include "scmwr/tensor.h"

namespace scmwr {

using GradMap = std::map<std::string, ad::Matrix, std::less<>>;

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t t = 0;
  std::map<std::string, ad::Matrix, std::less<>> m;
  std::map<std::string, ad::Matrix, std::less<>> v;
};

// Per-parameter multiplier on state.lr; null means 1 everywhere.
using LrScale = std::function<double(std::string_view name)>;

// One bias-corrected Adam update of every parameter named in `grads`.
// Throws NumericError naming the parameter when a gradient is not finite;
// in that case no parameter is modified.
void adam_step(AdamState& state, std::map<std::string, ad::Matrix, std::less<>>& params,
               const GradMap& grads, const LrScale& lr_scale = nullptr);

struct PlateauScheduler {
  double factor = 0.1;
  std::size_t patience = 5;
  double min_lr = 1e-12;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stall = 0;

  // Strict improvement resets the counter; after `patience` consecutive
  // non-improving epochs lr is multiplied by `factor` (floored at min_lr)
  // and the counter restarts. Throws NumericError on NaN.
  double update(double val_loss, double lr);
};

}  // namespace scmwr
