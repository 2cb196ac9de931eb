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

#include "scmwr/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "scmwr/errors.h"
#include "scmwr/rng.h"

namespace scmwr::ad {

namespace {

double evaluate(const LossFn& f) {
  Tape tape;
  const double v = f(tape).item();
  if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite");
  return v;
}

}  // namespace

GradCheckResult grad_check(const LossFn& f, std::span<Matrix* const> params,
                           const GradCheckOptions& options) {
  if (!(options.eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");
  if (!(options.rel_floor > 0.0)) {
    throw std::invalid_argument("grad_check: rel_floor must be positive");
  }

  std::vector<Matrix> analytic;
  double f0 = 0.0;
  {
    Tape tape;
    Tensor loss = f(tape);
    f0 = loss.item();
    if (!std::isfinite(f0)) throw NumericError("grad_check: loss is not finite");
    tape.backward(loss);
    for (Matrix* p : params) analytic.push_back(tape.parameter_grad(*p));
  }

  Rng rng(options.seed);
  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Matrix& p = *params[pi];
    std::vector<std::size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_param > 0 && coords.size() > options.max_coords_per_param) {
      rng.shuffle(std::span<std::size_t>(coords));
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t idx : coords) {
      const double saved = p[idx];
      p[idx] = saved + options.eps;
      const double f_plus = evaluate(f);
      p[idx] = saved - options.eps;
      const double f_minus = evaluate(f);
      p[idx] = saved;

      if (options.kink_tolerance > 0.0 &&
          std::fabs(f_plus - 2.0 * f0 + f_minus) > options.kink_tolerance) {
        ++result.skipped_kinks;
        continue;
      }
      const double numeric = (f_plus - f_minus) / (2.0 * options.eps);
      const double a = analytic[pi][idx];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), options.rel_floor});
      if (std::max(std::fabs(a), std::fabs(numeric)) < options.rel_floor) ++result.below_floor;
      const double rel = std::fabs(a - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = pi;
        result.worst_index = idx;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace scmwr::ad
