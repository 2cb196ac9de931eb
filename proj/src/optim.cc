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

#include "scmwr/optim.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "scmwr/errors.h"

namespace scmwr {

void adam_step(AdamState& s, std::map<std::string, ad::Matrix, std::less<>>& params,
               const GradMap& grads, const LrScale& lr_scale) {
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end()) throw std::invalid_argument("adam_step: unknown parameter " + name);
    if (!it->second.same_shape(g)) {
      throw ShapeError("adam_step: gradient shape " + g.shape_str() + " for " + name + " " +
                       it->second.shape_str());
    }
    for (double x : g.values()) {
      if (!std::isfinite(x)) throw NumericError("non-finite gradient in parameter " + name);
    }
  }

  ++s.t;
  const double t = static_cast<double>(s.t);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  for (const auto& [name, g] : grads) {
    ad::Matrix& p = params.find(name)->second;
    auto [mit, m_new] = s.m.try_emplace(name, p.rows(), p.cols());
    auto [vit, v_new] = s.v.try_emplace(name, p.rows(), p.cols());
    ad::Matrix& m = mit->second;
    ad::Matrix& v = vit->second;
    const double lr = lr_scale ? s.lr * lr_scale(name) : s.lr;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + s.epsilon);
    }
  }
}

double PlateauScheduler::update(double val_loss, double lr) {
  if (std::isnan(val_loss)) throw NumericError("validation loss is NaN");
  if (val_loss < best) {
    best = val_loss;
    stall = 0;
    return lr;
  }
  if (++stall < patience) return lr;
  stall = 0;
  return std::max(lr * factor, min_lr);
}

}  // namespace scmwr
