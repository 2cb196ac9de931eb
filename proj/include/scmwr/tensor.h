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

// Reverse-mode automatic differentiation over dense row-major double
// matrices. A Tape records every primitive applied during one forward pass;
// Tape::backward walks it in reverse and accumulates gradients into every
// node that depends on a variable or parameter leaf.
//
// Row-wise ops (layer_norm, l2_normalize, row_sum, row_mean) treat each row as
// one sample, so a batch of B samples is a B x n matrix.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace scmwr::ad {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  // 1 x n row vector.
  static Matrix row(std::initializer_list<double> values);
  static Matrix row(std::span<const double> values);
  static Matrix scalar(double v) { return Matrix(1, 1, v); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<const double> row_span(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  const std::vector<double>& storage() const { return data_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_str() const;

  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

class Tape;

// Handle to one node on a Tape. Cheap to copy; valid while the tape lives.
class Tensor {
 public:
  Tensor() = default;

  const Matrix& value() const;
  // Gradient after Tape::backward. Zero matrix when the node received none.
  const Matrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  // Value of a 1 x 1 tensor.
  double item() const;
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Tensor(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Called during backward with the node's forward output and its gradient.
// Implementations add their contributions into Tape::grad_buffer(input).
using BackwardFn = std::function<void(Tape& tape, const Matrix& out, const Matrix& out_grad)>;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that never receives gradient (data, fixed selection matrices).
  Tensor constant(Matrix value);
  // Leaf that owns its value and receives gradient.
  Tensor variable(Matrix value);
  // Leaf that references external storage (a model parameter). The referenced
  // matrix must outlive the tape and stay unmodified until backward finishes.
  // With requires_grad = false the leaf acts as a constant without copying.
  Tensor parameter(const Matrix& value, bool requires_grad = true);

  // Appends an op node. `backward` is dropped when no input requires grad.
  Tensor record(Matrix value, std::initializer_list<Tensor> inputs, BackwardFn backward);
  Tensor record(Matrix value, std::span<const Tensor> inputs, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and propagates in reverse order. Throws
  // std::invalid_argument when loss is not 1 x 1.
  void backward(Tensor loss);

  // Mutable gradient buffer of `t`, allocated on first use; nullptr when `t`
  // does not require grad. Only meaningful inside a BackwardFn.
  Matrix* grad_buffer(Tensor t);

  const Matrix& value(Tensor t) const;
  const Matrix& grad(Tensor t) const;
  // Sum of the gradients of every parameter leaf bound to `param`. Zero when
  // `param` was never bound on this tape.
  Matrix parameter_grad(const Matrix& param) const;
  bool requires_grad(Tensor t) const { return nodes_[t.id_].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix owned;
    const Matrix* external = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
    Matrix grad;
    const Matrix& value() const { return external ? *external : owned; }
  };

  Tensor push(Node node);
  void check(Tensor t) const;

  // deque keeps node addresses stable as the tape grows.
  std::deque<Node> nodes_;
};

// ---- primitives -----------------------------------------------------------

Tensor matmul(Tensor a, Tensor b);

Tensor add(Tensor a, Tensor b);
Tensor sub(Tensor a, Tensor b);
// Adds a 1 x n row to every row of an m x n tensor.
Tensor add_row(Tensor a, Tensor row);
Tensor scale(Tensor a, double s);
Tensor add_scalar(Tensor a, double s);
// Backward uses sign(x) with sign(0) = 0.
Tensor abs(Tensor a);
// Elementwise product of equally shaped tensors.
Tensor mul(Tensor a, Tensor b);

// relu'(0) = 0.
Tensor relu(Tensor x);
Tensor tanh(Tensor x);
Tensor sigmoid(Tensor x);

// Row-wise (x - mean) / sqrt(var + eps) * gamma + beta, with gamma/beta 1 x n.
Tensor layer_norm(Tensor x, Tensor gamma, Tensor beta, double eps = 1e-5);
// Row-wise x / max(||x||_2, eps).
Tensor l2_normalize(Tensor x, double eps = 1e-12);

enum class GateMode { kSoft, kHard };
// Suppresses entries below a learnable 1 x 1 threshold.
//   hard: y = x if x >= t else 0   (no gradient w.r.t. t)
//   soft: y = x * sigmoid(steepness * (x - t))
// Throws std::invalid_argument for non-positive steepness.
Tensor threshold_gate(Tensor x, Tensor threshold, GateMode mode, double steepness = 10.0);

// Clamps into [lo, hi]. With straight_through the backward pass is the
// identity; otherwise gradient is zero wherever the clamp is active.
Tensor clamp(Tensor x, double lo, double hi, bool straight_through = false);

// Reductions over all entries to a 1 x 1 tensor. Empty input throws.
Tensor sum(Tensor x);
Tensor mean(Tensor x);
// Per-row reductions to m x 1.
Tensor row_sum(Tensor x);
Tensor row_mean(Tensor x);

// Column-wise concatenation of tensors with equal row counts.
Tensor concat(std::span<const Tensor> parts);
Tensor concat(std::initializer_list<Tensor> parts);
// Same row-major data, new shape. rows * cols must match.
Tensor reshape(Tensor x, std::size_t rows, std::size_t cols);
// Rows [begin, begin + count) of x.
Tensor slice_rows(Tensor x, std::size_t begin, std::size_t count);

// Plain (non-recorded) kernels shared with other modules.
namespace kernels {
// out (m x n) = a (m x k) * b (k x n)
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
}  // namespace kernels

}  // namespace scmwr::ad
