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

// Training objectives. Each loss is a single tape node whose backward is
// written by hand; labels are plain ints in {0, 1}.

#include <cstddef>
#include <span>
#include <string_view>

#include "scmwr/tensor.h"

namespace scmwr {

inline constexpr double kProbClampLo = 1e-7;
inline constexpr double kProbClampHi = 1.0 - 1e-7;

struct ClassWeights {
  double negative = 1.0;
  double positive = 1.0;
};

// w_c = N / (2 n_c). When the correctly rounded quotients do not give
// n_neg * w_neg == n_pos * w_pos bitwise, each weight is moved by at most a
// few ulps until they do. Throws std::invalid_argument on a zero count.
ClassWeights class_weights(std::size_t n_negative, std::size_t n_positive);

// Mean over the batch of w_y * (-y ln p - (1 - y) ln(1 - p)). `probs` is B x 1
// and must already lie in [kProbClampLo, kProbClampHi].
ad::Tensor class_balanced_bce(ad::Tensor probs, std::span<const int> labels,
                              const ClassWeights& weights);
// Training objective for raw scores: the value is class_balanced_bce of the
// clamped scores. Inside the clamp range the gradient is exact. Outside it, a
// score on the correct side gets no gradient and a score on the wrong side
// (label 1 below the range, label 0 above it) gets -w_1/B or +w_0/B, so tanh
// heads that start below zero can still learn without the 1/p blow-up of
// the bound leaking into the optimizer.
ad::Tensor clamped_bce(ad::Tensor scores, std::span<const int> labels,
                       const ClassWeights& weights);
// Same value without a tape; scores are clamped here.
double class_balanced_bce_value(std::span<const double> scores, std::span<const int> labels,
                                const ClassWeights& weights);

enum class ContrastiveKind { kNone, kContrastive, kNPairs, kTripletHard, kTripletSemiHard };

// "none", "contrastive", "npairs", "triplet_hard", "triplet_semihard".
std::string_view to_string(ContrastiveKind kind);
ContrastiveKind parse_contrastive_kind(std::string_view name);

// Mean over unordered pairs: same label d^2, different label max(0, m - d)^2.
// Throws std::invalid_argument for fewer than two rows.
ad::Tensor contrastive_pair_loss(ad::Tensor embeddings, std::span<const int> labels,
                                 double margin = 1.0);
// Batch-hard: per anchor, hinge(max positive distance - min negative distance
// + margin), averaged over anchors that have both. 0 when no anchor qualifies.
ad::Tensor triplet_hard_loss(ad::Tensor embeddings, std::span<const int> labels,
                             double margin = 1.0);
// Per anchor-positive pair the closest negative farther than the positive,
// or the closest negative when none is farther. Hinged and averaged.
ad::Tensor triplet_semihard_loss(ad::Tensor embeddings, std::span<const int> labels,
                                 double margin = 1.0);
// Each class contributes at most one (anchor, positive) pair: its first two
// members in batch order. Softmax cross-entropy of a_i . p_i against every
// p_j; 0 with fewer than two pairs.
ad::Tensor npairs_loss(ad::Tensor embeddings, std::span<const int> labels);

// Dispatch; kNone yields a zero constant.
ad::Tensor contrastive_loss(ContrastiveKind kind, ad::Tensor embeddings,
                            std::span<const int> labels, double margin = 1.0);

}  // namespace scmwr
