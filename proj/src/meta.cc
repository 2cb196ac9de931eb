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

#include "scmwr/meta.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "scmwr/losses.h"

namespace scmwr {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double linear(const MetaClassifier& c, const SubScores& x) {
  return c.w[0] * x[0] + c.w[1] * x[1] + c.w[2] * x[2] + c.b;
}

std::vector<double> sample_weights(std::span<const int> labels) {
  const std::size_t pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t neg = labels.size() - pos;
  ClassWeights cw;
  if (pos > 0 && neg > 0) cw = class_weights(neg, pos);
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) w[i] = labels[i] == 1 ? cw.positive : cw.negative;
  return w;
}

void fit_logistic(MetaClassifier& c, std::span<const SubScores> x, std::span<const int> y,
                  const std::vector<double>& sw, const MetaOptions& o) {
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (c.iterations = 0; c.iterations < o.max_iters; ++c.iterations) {
    std::array<double, 3> gw{};
    double gb = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = sw[i] * (sigmoid(linear(c, x[i])) - y[i]) * inv_n;
      for (int k = 0; k < 3; ++k) gw[k] += r * x[i][k];
      gb += r;
    }
    const double norm = std::sqrt(gw[0] * gw[0] + gw[1] * gw[1] + gw[2] * gw[2] + gb * gb);
    if (norm < o.grad_tol) break;
    for (int k = 0; k < 3; ++k) c.w[k] -= o.logistic_step * gw[k];
    c.b -= o.logistic_step * gb;
  }
}

void fit_svm(MetaClassifier& c, std::span<const SubScores> x, std::span<const int> y,
             const std::vector<double>& sw, const MetaOptions& o) {
  const double inv_n = 1.0 / static_cast<double>(x.size());
  // Decaying step 1 / (lambda (t + t0)), starting near 1.
  const double t0 = 1.0 / o.svm_lambda;
  for (c.iterations = 0; c.iterations < o.max_iters; ++c.iterations) {
    std::array<double, 3> gw{};
    for (int k = 0; k < 3; ++k) gw[k] = o.svm_lambda * c.w[k];
    double gb = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double yi = y[i] == 1 ? 1.0 : -1.0;
      if (yi * linear(c, x[i]) < 1.0) {
        for (int k = 0; k < 3; ++k) gw[k] -= sw[i] * yi * x[i][k] * inv_n;
        gb -= sw[i] * yi * inv_n;
      }
    }
    const double step = 1.0 / (o.svm_lambda * (static_cast<double>(c.iterations) + t0));
    for (int k = 0; k < 3; ++k) c.w[k] -= step * gw[k];
    c.b -= step * gb;
  }
}

struct TreeBuilder {
  std::span<const SubScores> x;
  std::span<const int> y;
  const std::vector<double>& sw;
  const MetaOptions& o;
  std::vector<TreeNode>& nodes;

  static double gini(double wpos, double wtot) {
    if (wtot <= 0.0) return 0.0;
    const double p = wpos / wtot;
    return 2.0 * p * (1.0 - p);
  }

  int build(std::vector<std::size_t> idx, std::size_t depth) {
    double wpos = 0.0, wtot = 0.0;
    for (std::size_t i : idx) {
      wtot += sw[i];
      if (y[i] == 1) wpos += sw[i];
    }
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[id].value = wtot > 0.0 ? wpos / wtot : 0.0;
    if (depth >= o.tree_depth || wpos == 0.0 || wpos == wtot || idx.size() < 2 * o.min_leaf) {
      return id;
    }

    const double parent = gini(wpos, wtot) * wtot;
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (int f = 0; f < 3; ++f) {
      std::vector<std::size_t> sorted = idx;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
      double lpos = 0.0, ltot = 0.0;
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        const std::size_t i = sorted[k];
        ltot += sw[i];
        if (y[i] == 1) lpos += sw[i];
        const double here = x[i][f], next = x[sorted[k + 1]][f];
        if (here == next) continue;
        const std::size_t left_n = k + 1, right_n = sorted.size() - left_n;
        if (left_n < o.min_leaf || right_n < o.min_leaf) continue;
        const double child = gini(lpos, ltot) * ltot + gini(wpos - lpos, wtot - ltot) * (wtot - ltot);
        const double gain = parent - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = here + (next - here) / 2.0;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) (x[i][best_feature] <= best_threshold ? left : right).push_back(i);
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    nodes[id].feature = best_feature;
    nodes[id].threshold = best_threshold;
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }
};

}  // namespace

std::string_view to_string(MetaKind kind) {
  switch (kind) {
    case MetaKind::kAverage: return "average";
    case MetaKind::kMajority: return "majority";
    case MetaKind::kLogistic: return "logistic";
    case MetaKind::kLinearSvm: return "linear_svm";
    case MetaKind::kDecisionTree: return "decision_tree";
  }
  return "?";
}

MetaKind parse_meta_kind(std::string_view name) {
  for (MetaKind k : kAllMetaKinds) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown meta-classifier '" + std::string(name) + "'");
}

MetaClassifier fit_meta(MetaKind kind, std::span<const SubScores> x, std::span<const int> labels,
                        const MetaOptions& options) {
  if (x.size() != labels.size()) throw std::invalid_argument("fit_meta: size mismatch");
  if (x.empty()) throw std::invalid_argument("fit_meta: no samples");
  MetaClassifier c;
  c.kind = kind;
  const std::vector<double> sw = sample_weights(labels);
  switch (kind) {
    case MetaKind::kAverage:
    case MetaKind::kMajority: break;
    case MetaKind::kLogistic: fit_logistic(c, x, labels, sw, options); break;
    case MetaKind::kLinearSvm: fit_svm(c, x, labels, sw, options); break;
    case MetaKind::kDecisionTree: {
      std::vector<std::size_t> idx(x.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      TreeBuilder{x, labels, sw, options, c.tree}.build(std::move(idx), 0);
      break;
    }
  }
  return c;
}

std::vector<double> meta_predict(const MetaClassifier& c, std::span<const SubScores> x) {
  std::vector<double> out;
  out.reserve(x.size());
  for (const SubScores& s : x) {
    switch (c.kind) {
      case MetaKind::kAverage: out.push_back((s[0] + s[1] + s[2]) / 3.0); break;
      case MetaKind::kMajority: {
        const int votes = (s[0] >= 0.5) + (s[1] >= 0.5) + (s[2] >= 0.5);
        out.push_back(votes >= 2 ? 1.0 : 0.0);
        break;
      }
      case MetaKind::kLogistic:
      case MetaKind::kLinearSvm: out.push_back(sigmoid(linear(c, s))); break;
      case MetaKind::kDecisionTree: {
        int n = 0;
        while (c.tree[n].feature >= 0) {
          n = s[c.tree[n].feature] <= c.tree[n].threshold ? c.tree[n].left : c.tree[n].right;
        }
        out.push_back(c.tree[n].value);
        break;
      }
    }
  }
  return out;
}

}  // namespace scmwr
