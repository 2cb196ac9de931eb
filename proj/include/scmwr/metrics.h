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

// Classification metrics, multi-seed aggregation and embedding distances.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace scmwr {

inline constexpr double kDecisionThreshold = 0.5;

struct ConfusionMatrix {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Positive iff score >= threshold. Throws std::invalid_argument on length
// mismatch or empty input.
ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold = kDecisionThreshold);

// 0 when any marginal of the denominator is 0.
double mcc(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);
// Mann-Whitney: share of (positive, negative) pairs ranked correctly, ties
// half. Throws std::invalid_argument unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct RunMetrics {
  double mcc = 0.0;
  double accuracy = 0.0;
  double roc_auc = 0.0;
};

RunMetrics evaluate_scores(std::span<const double> scores, std::span<const int> labels);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population

  // "m ± s" with 2-decimal mean and 3-decimal std.
  std::string format() const;
};

MeanStd mean_std(std::span<const double> values);

struct AggregateMetrics {
  MeanStd mcc, accuracy, roc_auc;
};

// Throws std::invalid_argument for fewer than two runs.
AggregateMetrics aggregate_runs(std::span<const RunMetrics> runs);

struct EmbeddingStats {
  MeanStd within;   // all same-class pairs
  MeanStd between;  // all cross-class pairs
  std::size_t within_pairs = 0;
  std::size_t between_pairs = 0;
};

// Euclidean distances over all unordered pairs. Throws std::invalid_argument
// when a class has fewer than two members or rows differ in width.
EmbeddingStats embedding_distance_stats(std::span<const std::vector<double>> embeddings,
                                        std::span<const int> labels);

}  // namespace scmwr
