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

// Second-stage classifiers over the three sub-model scores (s_L, s_R, s_G).

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace scmwr {

using SubScores = std::array<double, 3>;

enum class MetaKind { kAverage, kMajority, kLogistic, kLinearSvm, kDecisionTree };

inline constexpr MetaKind kAllMetaKinds[] = {MetaKind::kAverage, MetaKind::kMajority,
                                             MetaKind::kLogistic, MetaKind::kLinearSvm,
                                             MetaKind::kDecisionTree};

// "average", "majority", "logistic", "linear_svm", "decision_tree".
std::string_view to_string(MetaKind kind);
// Throws std::invalid_argument for unknown names.
MetaKind parse_meta_kind(std::string_view name);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // x[feature] <= threshold
  int right = -1;
  double value = 0.0;  // weighted positive share at the node
};

struct MetaClassifier {
  MetaKind kind = MetaKind::kAverage;
  std::array<double, 3> w{};  // logistic / svm
  double b = 0.0;
  std::vector<TreeNode> tree;
  std::size_t iterations = 0;
};

struct MetaOptions {
  std::size_t max_iters = 10000;
  double logistic_step = 1.0;
  double grad_tol = 1e-8;
  double svm_lambda = 1e-3;
  std::size_t tree_depth = 3;
  std::size_t min_leaf = 5;
};

// Fitted classifiers weight each class by N / (2 n_c). Throws
// std::invalid_argument on size mismatch or empty input.
MetaClassifier fit_meta(MetaKind kind, std::span<const SubScores> x, std::span<const int> labels,
                        const MetaOptions& options = {});

// Scores on the same 0.5-threshold scale as the models: average is the mean
// sub-score, majority is 0/1, logistic and svm pass the linear response
// through a sigmoid, the tree reports its leaf's positive share.
std::vector<double> meta_predict(const MetaClassifier& clf, std::span<const SubScores> x);

}  // namespace scmwr
