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

// Central finite-difference check of Tape::backward.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "scmwr/tensor.h"

namespace scmwr::ad {

// Builds a 1 x 1 loss on a fresh tape. Parameters must be bound with
// Tape::parameter so their gradients can be read back.
using LossFn = std::function<Tensor(Tape&)>;

struct GradCheckOptions {
  double eps = 1e-6;
  // Checks at most this many randomly chosen coordinates per parameter
  // matrix; 0 checks every coordinate.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
  // When positive, a coordinate whose second difference
  // |f(p+eps) - 2 f(p) + f(p-eps)| exceeds this value straddles a kink and is
  // skipped.
  double kink_tolerance = 0.0;
  // Denominator floor of the relative error. Below it the check is absolute:
  // |a - n| < tol * rel_floor. The difference quotient cannot resolve much
  // better than ulp(f) / (2 eps), so a floor near that level turns rounding
  // on vanishing gradients into spurious failures.
  double rel_floor = 1e-8;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  std::size_t below_floor = 0;  // checked coordinates with |a|, |n| < rel_floor
  // Location of the worst coordinate.
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares backward against a finite-difference estimate coordinate by
// coordinate. Relative error is |a - n| / max(|a|, |n|, rel_floor). Parameters are
// restored exactly on return. Throws NumericError if f is non-finite.
GradCheckResult grad_check(const LossFn& f, std::span<Matrix* const> params,
                           const GradCheckOptions& options = {});

}  // namespace scmwr::ad
