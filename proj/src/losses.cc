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

#include "scmwr/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "scmwr/errors.h"

namespace scmwr {
namespace {

using ad::Matrix;
using ad::Tensor;

void check_labels(const Tensor& x, std::span<const int> labels, const char* op) {
  if (x.rows() != labels.size()) {
    throw ShapeError(std::string(op) + ": " + std::to_string(x.rows()) + " rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument(std::string(op) + ": label not in {0,1}");
  }
}

// Scalar loss node with a gradient precomputed in the forward pass.
Tensor loss_node(Tensor input, double value, Matrix grad) {
  ad::Tape& tape = *input.tape();
  return tape.record(Matrix::scalar(value), {input},
                     [input, grad = std::move(grad)](ad::Tape& t, const Matrix&,
                                                     const Matrix& out_grad) {
                       Matrix* g = t.grad_buffer(input);
                       if (!g) return;
                       const double s = out_grad[0];
                       for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += s * grad[i];
                     });
}

// Pairwise Euclidean distances between rows.
Matrix distances(const Matrix& e) {
  const std::size_t n = e.rows(), d = e.cols();
  Matrix dist(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = e(i, k) - e(j, k);
        s += diff * diff;
      }
      dist(i, j) = dist(j, i) = std::sqrt(s);
    }
  }
  return dist;
}

// grad += coeff * d(dist_ij)/d(e), using a zero subgradient at dist 0.
void add_distance_grad(const Matrix& e, const Matrix& dist, std::size_t i, std::size_t j,
                       double coeff, Matrix& grad) {
  const double dij = dist(i, j);
  if (dij == 0.0 || coeff == 0.0) return;
  for (std::size_t k = 0; k < e.cols(); ++k) {
    const double g = coeff * (e(i, k) - e(j, k)) / dij;
    grad(i, k) += g;
    grad(j, k) -= g;
  }
}

Tensor zero_loss(Tensor embeddings) {
  return loss_node(embeddings, 0.0, Matrix(embeddings.rows(), embeddings.cols()));
}

}  // namespace

ClassWeights class_weights(std::size_t n_negative, std::size_t n_positive) {
  if (n_negative == 0 || n_positive == 0) {
    throw std::invalid_argument("class_weights: both classes need at least one sample");
  }
  const double n_neg = static_cast<double>(n_negative);
  const double n_pos = static_cast<double>(n_positive);
  const double total = n_neg + n_pos;
  const ClassWeights exact{total / (2.0 * n_neg), total / (2.0 * n_pos)};

  // Candidates ordered by ulp distance from the correctly rounded value.
  auto nearby = [](double w) {
    std::vector<double> out{w};
    double up = w, down = w;
    for (int k = 0; k < 4; ++k) {
      up = std::nextafter(up, std::numeric_limits<double>::infinity());
      down = std::nextafter(down, 0.0);
      out.push_back(up);
      out.push_back(down);
    }
    return out;
  };
  const std::vector<double> negs = nearby(exact.negative);
  const std::vector<double> poss = nearby(exact.positive);
  for (std::size_t radius = 0; radius < negs.size() + poss.size(); ++radius) {
    for (std::size_t a = 0; a < negs.size() && a <= radius; ++a) {
      const std::size_t b = radius - a;
      if (b >= poss.size()) continue;
      if (n_neg * negs[a] == n_pos * poss[b]) return {negs[a], poss[b]};
    }
  }
  return exact;
}

Tensor class_balanced_bce(Tensor probs, std::span<const int> labels, const ClassWeights& w) {
  check_labels(probs, labels, "class_balanced_bce");
  if (probs.cols() != 1) throw ShapeError("class_balanced_bce: expected B x 1, got " +
                                          probs.value().shape_str());
  if (labels.empty()) throw std::invalid_argument("class_balanced_bce: empty batch");
  const Matrix& p = probs.value();
  const double inv_b = 1.0 / static_cast<double>(labels.size());
  double loss = 0.0;
  Matrix grad(p.rows(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double pi = p[i];
    if (!(pi > 0.0 && pi < 1.0)) {
      throw std::invalid_argument("class_balanced_bce: probability outside (0,1)");
    }
    if (labels[i] == 1) {
      loss += w.positive * -std::log(pi);
      grad[i] = -w.positive / pi * inv_b;
    } else {
      loss += w.negative * -std::log(1.0 - pi);
      grad[i] = w.negative / (1.0 - pi) * inv_b;
    }
  }
  return loss_node(probs, loss * inv_b, std::move(grad));
}

Tensor clamped_bce(Tensor scores, std::span<const int> labels, const ClassWeights& w) {
  check_labels(scores, labels, "clamped_bce");
  if (scores.cols() != 1) throw ShapeError("clamped_bce: expected B x 1, got " +
                                           scores.value().shape_str());
  if (labels.empty()) throw std::invalid_argument("clamped_bce: empty batch");
  const Matrix& s = scores.value();
  const double inv_b = 1.0 / static_cast<double>(labels.size());
  double loss = 0.0;
  Matrix grad(s.rows(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(s[i], kProbClampLo, kProbClampHi);
    const bool inside = s[i] > kProbClampLo && s[i] < kProbClampHi;
    if (labels[i] == 1) {
      loss += w.positive * -std::log(p);
      if (inside) {
        grad[i] = -w.positive / p * inv_b;
      } else if (s[i] <= kProbClampLo) {
        grad[i] = -w.positive * inv_b;
      }
    } else {
      loss += w.negative * -std::log(1.0 - p);
      if (inside) {
        grad[i] = w.negative / (1.0 - p) * inv_b;
      } else if (s[i] >= kProbClampHi) {
        grad[i] = w.negative * inv_b;
      }
    }
  }
  return loss_node(scores, loss * inv_b, std::move(grad));
}

double class_balanced_bce_value(std::span<const double> scores, std::span<const int> labels,
                                const ClassWeights& w) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("class_balanced_bce_value: size mismatch or empty");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = std::clamp(scores[i], kProbClampLo, kProbClampHi);
    loss += labels[i] == 1 ? w.positive * -std::log(p) : w.negative * -std::log(1.0 - p);
  }
  return loss / static_cast<double>(scores.size());
}

std::string_view to_string(ContrastiveKind kind) {
  switch (kind) {
    case ContrastiveKind::kNone: return "none";
    case ContrastiveKind::kContrastive: return "contrastive";
    case ContrastiveKind::kNPairs: return "npairs";
    case ContrastiveKind::kTripletHard: return "triplet_hard";
    case ContrastiveKind::kTripletSemiHard: return "triplet_semihard";
  }
  return "?";
}

ContrastiveKind parse_contrastive_kind(std::string_view name) {
  for (ContrastiveKind k :
       {ContrastiveKind::kNone, ContrastiveKind::kContrastive, ContrastiveKind::kNPairs,
        ContrastiveKind::kTripletHard, ContrastiveKind::kTripletSemiHard}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown contrastive loss '" + std::string(name) +
                    "' (expected none, contrastive, npairs, triplet_hard, triplet_semihard)");
}

Tensor contrastive_pair_loss(Tensor embeddings, std::span<const int> labels, double margin) {
  check_labels(embeddings, labels, "contrastive_pair_loss");
  const std::size_t n = labels.size();
  if (n < 2) throw std::invalid_argument("contrastive_pair_loss: need at least 2 samples");
  const Matrix& e = embeddings.value();
  const Matrix dist = distances(e);
  const double inv_pairs = 2.0 / static_cast<double>(n * (n - 1));
  double loss = 0.0;
  Matrix grad(e.rows(), e.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = dist(i, j);
      if (labels[i] == labels[j]) {
        loss += d * d;
        // d(d^2)/de_i = 2 (e_i - e_j), smooth at 0.
        for (std::size_t k = 0; k < e.cols(); ++k) {
          const double g = 2.0 * (e(i, k) - e(j, k)) * inv_pairs;
          grad(i, k) += g;
          grad(j, k) -= g;
        }
      } else if (d < margin) {
        loss += (margin - d) * (margin - d);
        add_distance_grad(e, dist, i, j, -2.0 * (margin - d) * inv_pairs, grad);
      }
    }
  }
  return loss_node(embeddings, loss * inv_pairs, std::move(grad));
}

Tensor triplet_hard_loss(Tensor embeddings, std::span<const int> labels, double margin) {
  check_labels(embeddings, labels, "triplet_hard_loss");
  const std::size_t n = labels.size();
  const Matrix& e = embeddings.value();
  const Matrix dist = distances(e);

  struct Term {
    std::size_t a, p, n;
    double value;
  };
  std::vector<Term> terms;
  std::size_t valid = 0;
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t hp = n, hn = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      if (labels[j] == labels[a]) {
        if (hp == n || dist(a, j) > dist(a, hp)) hp = j;
      } else if (hn == n || dist(a, j) < dist(a, hn)) {
        hn = j;
      }
    }
    if (hp == n || hn == n) continue;
    ++valid;
    const double v = dist(a, hp) - dist(a, hn) + margin;
    if (v > 0.0) terms.push_back({a, hp, hn, v});
  }
  if (valid == 0) return zero_loss(embeddings);

  const double inv = 1.0 / static_cast<double>(valid);
  double loss = 0.0;
  Matrix grad(e.rows(), e.cols());
  for (const Term& t : terms) {
    loss += t.value;
    add_distance_grad(e, dist, t.a, t.p, inv, grad);
    add_distance_grad(e, dist, t.a, t.n, -inv, grad);
  }
  return loss_node(embeddings, loss * inv, std::move(grad));
}

Tensor triplet_semihard_loss(Tensor embeddings, std::span<const int> labels, double margin) {
  check_labels(embeddings, labels, "triplet_semihard_loss");
  const std::size_t n = labels.size();
  const Matrix& e = embeddings.value();
  const Matrix dist = distances(e);

  struct Term {
    std::size_t a, p, n;
    double value;
  };
  std::vector<Term> terms;
  std::size_t valid = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      const double dap = dist(a, p);
      std::size_t semi = n, hardest = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[j] == labels[a]) continue;
        if (hardest == n || dist(a, j) < dist(a, hardest)) hardest = j;
        if (dist(a, j) > dap && (semi == n || dist(a, j) < dist(a, semi))) semi = j;
      }
      if (hardest == n) continue;
      ++valid;
      const std::size_t neg = semi != n ? semi : hardest;
      const double v = dap - dist(a, neg) + margin;
      if (v > 0.0) terms.push_back({a, p, neg, v});
    }
  }
  if (valid == 0) return zero_loss(embeddings);

  const double inv = 1.0 / static_cast<double>(valid);
  double loss = 0.0;
  Matrix grad(e.rows(), e.cols());
  for (const Term& t : terms) {
    loss += t.value;
    add_distance_grad(e, dist, t.a, t.p, inv, grad);
    add_distance_grad(e, dist, t.a, t.n, -inv, grad);
  }
  return loss_node(embeddings, loss * inv, std::move(grad));
}

Tensor npairs_loss(Tensor embeddings, std::span<const int> labels) {
  check_labels(embeddings, labels, "npairs_loss");
  const Matrix& e = embeddings.value();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size() && members.size() < 2; ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.size() == 2) pairs.emplace_back(members[0], members[1]);
  }
  const std::size_t m = pairs.size();
  if (m < 2) return zero_loss(embeddings);

  auto dot = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t k = 0; k < e.cols(); ++k) s += e(i, k) * e(j, k);
    return s;
  };
  const double inv = 1.0 / static_cast<double>(m);
  double loss = 0.0;
  Matrix grad(e.rows(), e.cols());
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t anchor = pairs[i].first;
    std::vector<double> logits(m);
    for (std::size_t j = 0; j < m; ++j) logits[j] = dot(anchor, pairs[j].second);
    const double top = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - top);
    loss += top + std::log(z) - logits[i];
    for (std::size_t j = 0; j < m; ++j) {
      const double coeff = (std::exp(logits[j] - top) / z - (i == j ? 1.0 : 0.0)) * inv;
      const std::size_t pos = pairs[j].second;
      for (std::size_t k = 0; k < e.cols(); ++k) {
        grad(anchor, k) += coeff * e(pos, k);
        grad(pos, k) += coeff * e(anchor, k);
      }
    }
  }
  return loss_node(embeddings, loss * inv, std::move(grad));
}

Tensor contrastive_loss(ContrastiveKind kind, Tensor embeddings, std::span<const int> labels,
                        double margin) {
  switch (kind) {
    case ContrastiveKind::kNone: return embeddings.tape()->constant(Matrix::scalar(0.0));
    case ContrastiveKind::kContrastive: return contrastive_pair_loss(embeddings, labels, margin);
    case ContrastiveKind::kNPairs: return npairs_loss(embeddings, labels);
    case ContrastiveKind::kTripletHard: return triplet_hard_loss(embeddings, labels, margin);
    case ContrastiveKind::kTripletSemiHard:
      return triplet_semihard_loss(embeddings, labels, margin);
  }
  throw std::invalid_argument("contrastive_loss: bad kind");
}

}  // namespace scmwr
