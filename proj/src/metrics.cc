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

#include "scmwr/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace scmwr {

ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(scores.size()) + " scores but " +
                                std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw std::invalid_argument("confusion: no samples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i] == 1) {
      pred ? ++cm.tp : ++cm.fn;
    } else {
      pred ? ++cm.fp : ++cm.tn;
    }
  }
  return cm;
}

double mcc(const ConfusionMatrix& cm) {
  const double tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
  const double fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) return 0.0;
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: size mismatch");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Count, in units of half-pairs, how many negatives each positive beats.
  std::size_t n_pos = 0, n_neg = 0;
  unsigned long long twice_wins = 0;
  std::size_t neg_below = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i, pos_tie = 0, neg_tie = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      labels[idx[j]] == 1 ? ++pos_tie : ++neg_tie;
      ++j;
    }
    twice_wins += static_cast<unsigned long long>(pos_tie) * (2 * neg_below + neg_tie);
    neg_below += neg_tie;
    n_pos += pos_tie;
    n_neg += neg_tie;
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("roc_auc: both classes must be present");
  }
  return static_cast<double>(twice_wins) /
         (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

RunMetrics evaluate_scores(std::span<const double> scores, std::span<const int> labels) {
  const ConfusionMatrix cm = confusion(scores, labels);
  return {mcc(cm), accuracy(cm), roc_auc(scores, labels)};
}

std::string MeanStd::format() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.3f", mean, std);
  return buf;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_std: no values");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

AggregateMetrics aggregate_runs(std::span<const RunMetrics> runs) {
  if (runs.size() < 2) throw std::invalid_argument("aggregate_runs: need at least 2 runs");
  std::vector<double> m, a, r;
  for (const RunMetrics& x : runs) {
    m.push_back(x.mcc);
    a.push_back(x.accuracy);
    r.push_back(x.roc_auc);
  }
  return {mean_std(m), mean_std(a), mean_std(r)};
}

EmbeddingStats embedding_distance_stats(std::span<const std::vector<double>> e,
                                        std::span<const int> labels) {
  if (e.size() != labels.size()) throw std::invalid_argument("embedding_distance_stats: size mismatch");
  const std::size_t pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (pos < 2 || labels.size() - pos < 2) {
    throw std::invalid_argument("embedding_distance_stats: each class needs at least 2 samples");
  }
  std::vector<double> within, between;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i].size() != e[0].size()) throw std::invalid_argument("embedding_distance_stats: ragged rows");
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < e[i].size(); ++k) {
        const double d = e[i][k] - e[j][k];
        s += d * d;
      }
      (labels[i] == labels[j] ? within : between).push_back(std::sqrt(s));
    }
  }
  return {mean_std(within), mean_std(between), within.size(), between.size()};
}

}  // namespace scmwr
