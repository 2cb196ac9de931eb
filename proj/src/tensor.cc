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

#include "scmwr/tensor.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "scmwr/errors.h"

namespace scmwr::ad {

// ---- Matrix -----------------------------------------------------------------

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("Matrix: data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::row(std::initializer_list<double> values) {
  return Matrix(1, values.size(), std::vector<double>(values));
}

Matrix Matrix::row(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

std::string Matrix::shape_str() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

// ---- Tensor / Tape ----------------------------------------------------------

const Matrix& Tensor::value() const { return tape_->value(*this); }
const Matrix& Tensor::grad() const { return tape_->grad(*this); }
bool Tensor::requires_grad() const { return tape_->requires_grad(*this); }

double Tensor::item() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ShapeError("item() on non-scalar tensor " + v.shape_str());
  return v[0];
}

Tensor Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Tensor(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::check(Tensor t) const {
  if (t.tape_ != this || t.id_ >= nodes_.size()) {
    throw std::invalid_argument("tensor does not belong to this tape");
  }
}

Tensor Tape::constant(Matrix value) {
  Node n;
  n.owned = std::move(value);
  return push(std::move(n));
}

Tensor Tape::variable(Matrix value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Tensor Tape::parameter(const Matrix& value, bool requires_grad) {
  Node n;
  n.external = &value;
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Tensor Tape::record(Matrix value, std::initializer_list<Tensor> inputs, BackwardFn backward) {
  return record(std::move(value), std::span<const Tensor>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Tensor Tape::record(Matrix value, std::span<const Tensor> inputs, BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  for (const Tensor& in : inputs) {
    check(in);
    if (nodes_[in.id_].requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const Matrix& Tape::value(Tensor t) const {
  check(t);
  return nodes_[t.id_].value();
}

const Matrix& Tape::grad(Tensor t) const {
  check(t);
  const Node& n = nodes_[t.id_];
  if (n.grad.empty() && !n.value().empty()) {
    // Lazily materialized zero gradient for nodes nothing flowed into.
    auto& self = const_cast<Tape&>(*this);
    self.nodes_[t.id_].grad = Matrix(n.value().rows(), n.value().cols());
  }
  return nodes_[t.id_].grad;
}

Matrix Tape::parameter_grad(const Matrix& param) const {
  Matrix total(param.rows(), param.cols());
  for (const Node& n : nodes_) {
    if (n.external != &param || n.grad.empty()) continue;
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += n.grad[i];
  }
  return total;
}

Matrix* Tape::grad_buffer(Tensor t) {
  check(t);
  Node& n = nodes_[t.id_];
  if (!n.requires_grad) return nullptr;
  if (!n.grad.same_shape(n.value())) n.grad = Matrix(n.value().rows(), n.value().cols());
  return &n.grad;
}

void Tape::backward(Tensor loss) {
  check(loss);
  if (nodes_[loss.id_].value().size() != 1 || nodes_[loss.id_].value().rows() != 1) {
    throw std::invalid_argument("backward: loss must be 1x1, got " +
                                nodes_[loss.id_].value().shape_str());
  }
  for (Node& n : nodes_) n.grad = Matrix();
  Matrix* seed = grad_buffer(loss);
  if (seed == nullptr) return;
  (*seed)[0] = 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, n.value(), n.grad);
  }
}

// ---- kernels ----------------------------------------------------------------

namespace kernels {

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  out = Matrix(m, n);
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* po = out.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = po + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = pa[i * k + kk];
      if (av == 0.0) continue;
      const double* brow = pb + kk * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

}  // namespace kernels

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
}

template <typename F>
Matrix map(const Matrix& x, F f) {
  Matrix out(x.rows(), x.cols());
  auto in = x.values();
  auto o = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = f(in[i]);
  return out;
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

// ---- primitives -------------------------------------------------------------

Tensor matmul(Tensor a, Tensor b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: inner dimensions differ " + av.shape_str() + " * " + bv.shape_str());
  }
  Matrix out;
  kernels::matmul(av, bv, out);
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& tape, const Matrix&, const Matrix& g) {
    const Matrix& A = a.value();
    const Matrix& B = b.value();
    const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
    if (Matrix* ga = tape.grad_buffer(a)) {
      // ga += g * B^T
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.values().data() + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double* brow = B.values().data() + kk * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          (*ga)(i, kk) += acc;
        }
      }
    }
    if (Matrix* gb = tape.grad_buffer(b)) {
      // gb += A^T * g
      double* pgb = gb->values().data();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.values().data() + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double av = A(i, kk);
          if (av == 0.0) continue;
          double* dst = pgb + kk * n;
          for (std::size_t j = 0; j < n; ++j) dst[j] += av * grow[j];
        }
      }
    }
  });
}

Tensor add(Tensor a, Tensor b) {
  require_same_shape(a.value(), b.value(), "add");
  Matrix out = a.value();
  auto o = out.values();
  auto bv = b.value().values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& tape, const Matrix&, const Matrix& g) {
    for (Tensor t : {a, b}) {
      if (Matrix* gt = tape.grad_buffer(t)) {
        for (std::size_t i = 0; i < g.size(); ++i) (*gt)[i] += g[i];
      }
    }
  });
}

Tensor sub(Tensor a, Tensor b) {
  require_same_shape(a.value(), b.value(), "sub");
  Matrix out = a.value();
  auto o = out.values();
  auto bv = b.value().values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& tape, const Matrix&, const Matrix& g) {
    if (Matrix* ga = tape.grad_buffer(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    }
    if (Matrix* gb = tape.grad_buffer(b)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
    }
  });
}

Tensor add_row(Tensor a, Tensor row) {
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw ShapeError("add_row: row " + rv.shape_str() + " does not broadcast over " +
                     av.shape_str());
  }
  Matrix out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += rv[c];
  }
  return a.tape()->record(std::move(out), {a, row}, [a, row](Tape& tape, const Matrix&, const Matrix& g) {
    if (Matrix* ga = tape.grad_buffer(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    }
    if (Matrix* gr = tape.grad_buffer(row)) {
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) (*gr)[c] += g(r, c);
      }
    }
  });
}

Tensor scale(Tensor a, double s) {
  Matrix out = map(a.value(), [s](double v) { return v * s; });
  return a.tape()->record(std::move(out), {a}, [a, s](Tape& tape, const Matrix&, const Matrix& g) {
    Matrix* ga = tape.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += s * g[i];
  });
}

Tensor add_scalar(Tensor a, double s) {
  Matrix out = map(a.value(), [s](double v) { return v + s; });
  return a.tape()->record(std::move(out), {a}, [a](Tape& tape, const Matrix&, const Matrix& g) {
    Matrix* ga = tape.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
  });
}

Tensor abs(Tensor a) {
  Matrix out = map(a.value(), [](double v) { return std::fabs(v); });
  return a.tape()->record(std::move(out), {a}, [a](Tape& tape, const Matrix&, const Matrix& g) {
    Matrix* ga = tape.grad_buffer(a);
    const Matrix& x = a.value();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double sign = x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0);
      (*ga)[i] += sign * g[i];
    }
  });
}

Tensor mul(Tensor a, Tensor b) {
  require_same_shape(a.value(), b.value(), "mul");
  Matrix out = a.value();
  auto o = out.values();
  auto bv = b.value().values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& tape, const Matrix&, const Matrix& g) {
    if (Matrix* ga = tape.grad_buffer(a)) {
      const Matrix& bv = b.value();
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
    }
    if (Matrix* gb = tape.grad_buffer(b)) {
      const Matrix& av = a.value();
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
    }
  });
}

Tensor relu(Tensor x) {
  Matrix out = map(x.value(), [](double v) { return v > 0 ? v : 0.0; });
  return x.tape()->record(std::move(out), {x}, [x](Tape& tape, const Matrix&, const Matrix& g) {
    Matrix* gx = tape.grad_buffer(x);
    const Matrix& xv = x.value();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0) (*gx)[i] += g[i];
    }
  });
}

Tensor tanh(Tensor x) {
  Matrix out = map(x.value(), [](double v) { return std::tanh(v); });
  return x.tape()->record(std::move(out), {x}, [x](Tape& tape, const Matrix& y, const Matrix& g) {
    Matrix* gx = tape.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Tensor sigmoid(Tensor x) {
  Matrix out = map(x.value(), stable_sigmoid);
  return x.tape()->record(std::move(out), {x}, [x](Tape& tape, const Matrix& y, const Matrix& g) {
    Matrix* gx = tape.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Tensor layer_norm(Tensor x, Tensor gamma, Tensor beta, double eps) {
  const Matrix& xv = x.value();
  const std::size_t m = xv.rows(), n = xv.cols();
  if (n == 0) throw std::invalid_argument("layer_norm: empty feature axis");
  const Matrix& gv = gamma.value();
  const Matrix& bv = beta.value();
  if (gv.rows() != 1 || gv.cols() != n || !gv.same_shape(bv)) {
    throw ShapeError("layer_norm: affine params " + gv.shape_str() + "/" + bv.shape_str() +
                     " do not match input " + xv.shape_str());
  }
  // Saved for backward: normalized rows and per-row 1/sigma.
  auto xhat = std::make_shared<Matrix>(m, n);
  auto inv_sigma = std::make_shared<std::vector<double>>(m);
  Matrix out(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    double mu = 0.0;
    for (std::size_t c = 0; c < n; ++c) mu += xv(r, c);
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double d = xv(r, c) - mu;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_sigma)[r] = is;
    for (std::size_t c = 0; c < n; ++c) {
      const double h = (xv(r, c) - mu) * is;
      (*xhat)(r, c) = h;
      out(r, c) = h * gv[c] + bv[c];
    }
  }
  return x.tape()->record(
      std::move(out), {x, gamma, beta},
      [x, gamma, beta, xhat, inv_sigma](Tape& tape, const Matrix&, const Matrix& g) {
        const std::size_t m = g.rows(), n = g.cols();
        const Matrix& gv = gamma.value();
        if (Matrix* gg = tape.grad_buffer(gamma)) {
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) (*gg)[c] += g(r, c) * (*xhat)(r, c);
        }
        if (Matrix* gb = tape.grad_buffer(beta)) {
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) (*gb)[c] += g(r, c);
        }
        if (Matrix* gx = tape.grad_buffer(x)) {
          const double inv_n = 1.0 / static_cast<double>(n);
          for (std::size_t r = 0; r < m; ++r) {
            double mean_d = 0.0, mean_dh = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
              const double d = g(r, c) * gv[c];
              mean_d += d;
              mean_dh += d * (*xhat)(r, c);
            }
            mean_d *= inv_n;
            mean_dh *= inv_n;
            const double is = (*inv_sigma)[r];
            for (std::size_t c = 0; c < n; ++c) {
              const double d = g(r, c) * gv[c];
              (*gx)(r, c) += is * (d - mean_d - (*xhat)(r, c) * mean_dh);
            }
          }
        }
      });
}

Tensor l2_normalize(Tensor x, double eps) {
  const Matrix& xv = x.value();
  const std::size_t m = xv.rows(), n = xv.cols();
  auto norms = std::make_shared<std::vector<double>>(m);
  Matrix out(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    double ss = 0.0;
    for (std::size_t c = 0; c < n; ++c) ss += xv(r, c) * xv(r, c);
    const double denom = std::max(std::sqrt(ss), eps);
    (*norms)[r] = std::sqrt(ss);
    for (std::size_t c = 0; c < n; ++c) out(r, c) = xv(r, c) / denom;
  }
  return x.tape()->record(
      std::move(out), {x}, [x, norms, eps](Tape& tape, const Matrix& y, const Matrix& g) {
        Matrix* gx = tape.grad_buffer(x);
        const std::size_t m = g.rows(), n = g.cols();
        for (std::size_t r = 0; r < m; ++r) {
          const double norm = (*norms)[r];
          if (norm >= eps && norm > 0.0) {
            double dot = 0.0;
            for (std::size_t c = 0; c < n; ++c) dot += y(r, c) * g(r, c);
            for (std::size_t c = 0; c < n; ++c) (*gx)(r, c) += (g(r, c) - y(r, c) * dot) / norm;
          } else {
            for (std::size_t c = 0; c < n; ++c) (*gx)(r, c) += g(r, c) / eps;
          }
        }
      });
}

Tensor threshold_gate(Tensor x, Tensor threshold, GateMode mode, double steepness) {
  if (!(steepness > 0.0)) {
    throw std::invalid_argument("threshold_gate: steepness must be positive");
  }
  if (threshold.value().size() != 1) {
    throw ShapeError("threshold_gate: threshold must be 1x1, got " + threshold.value().shape_str());
  }
  const double t = threshold.item();
  const Matrix& xv = x.value();
  if (mode == GateMode::kHard) {
    Matrix out = map(xv, [t](double v) { return v >= t ? v : 0.0; });
    return x.tape()->record(std::move(out), {x, threshold},
                            [x, t](Tape& tape, const Matrix&, const Matrix& g) {
                              if (Matrix* gx = tape.grad_buffer(x)) {
                                const Matrix& xv = x.value();
                                for (std::size_t i = 0; i < g.size(); ++i) {
                                  if (xv[i] >= t) (*gx)[i] += g[i];
                                }
                              }
                            });
  }
  auto gate = std::make_shared<Matrix>(map(xv, [t, steepness](double v) {
    return stable_sigmoid(steepness * (v - t));
  }));
  Matrix out(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * (*gate)[i];
  return x.tape()->record(
      std::move(out), {x, threshold},
      [x, threshold, gate, steepness](Tape& tape, const Matrix&, const Matrix& g) {
        const Matrix& xv = x.value();
        Matrix* gx = tape.grad_buffer(x);
        Matrix* gt = tape.grad_buffer(threshold);
        double dt = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double s = (*gate)[i];
          const double ds = steepness * s * (1.0 - s);
          if (gx) (*gx)[i] += g[i] * (s + xv[i] * ds);
          dt -= g[i] * xv[i] * ds;
        }
        if (gt) (*gt)[0] += dt;
      });
}

Tensor clamp(Tensor x, double lo, double hi, bool straight_through) {
  Matrix out = map(x.value(), [lo, hi](double v) { return std::clamp(v, lo, hi); });
  return x.tape()->record(
      std::move(out), {x}, [x, lo, hi, straight_through](Tape& tape, const Matrix&, const Matrix& g) {
        Matrix* gx = tape.grad_buffer(x);
        const Matrix& xv = x.value();
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (straight_through || (xv[i] >= lo && xv[i] <= hi)) (*gx)[i] += g[i];
        }
      });
}

Tensor sum(Tensor x) {
  const Matrix& xv = x.value();
  if (xv.empty()) throw std::invalid_argument("sum: empty tensor");
  double s = 0.0;
  for (double v : xv.values()) s += v;
  return x.tape()->record(Matrix::scalar(s), {x}, [x](Tape& tape, const Matrix&, const Matrix& g) {
    Matrix* gx = tape.grad_buffer(x);
    for (double& v : gx->values()) v += g[0];
  });
}

Tensor mean(Tensor x) {
  const Matrix& xv = x.value();
  if (xv.empty()) throw std::invalid_argument("mean: empty tensor");
  double s = 0.0;
  for (double v : xv.values()) s += v;
  const double inv = 1.0 / static_cast<double>(xv.size());
  return x.tape()->record(Matrix::scalar(s * inv), {x},
                          [x, inv](Tape& tape, const Matrix&, const Matrix& g) {
                            Matrix* gx = tape.grad_buffer(x);
                            for (double& v : gx->values()) v += g[0] * inv;
                          });
}

Tensor row_sum(Tensor x) {
  const Matrix& xv = x.value();
  if (xv.cols() == 0) throw std::invalid_argument("row_sum: empty rows");
  Matrix out(xv.rows(), 1);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    double s = 0.0;
    for (double v : xv.row_span(r)) s += v;
    out[r] = s;
  }
  return x.tape()->record(std::move(out), {x}, [x](Tape& tape, const Matrix&, const Matrix& g) {
    Matrix* gx = tape.grad_buffer(x);
    for (std::size_t r = 0; r < gx->rows(); ++r)
      for (std::size_t c = 0; c < gx->cols(); ++c) (*gx)(r, c) += g[r];
  });
}

Tensor row_mean(Tensor x) {
  const Matrix& xv = x.value();
  if (xv.cols() == 0) throw std::invalid_argument("row_mean: empty rows");
  const double inv = 1.0 / static_cast<double>(xv.cols());
  Matrix out(xv.rows(), 1);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    double s = 0.0;
    for (double v : xv.row_span(r)) s += v;
    out[r] = s * inv;
  }
  return x.tape()->record(std::move(out), {x},
                          [x, inv](Tape& tape, const Matrix&, const Matrix& g) {
                            Matrix* gx = tape.grad_buffer(x);
                            for (std::size_t r = 0; r < gx->rows(); ++r)
                              for (std::size_t c = 0; c < gx->cols(); ++c)
                                (*gx)(r, c) += g[r] * inv;
                          });
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: empty list");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != rows) {
      throw ShapeError("concat: row counts differ (" + std::to_string(p.rows()) + " vs " +
                       std::to_string(rows) + ")");
    }
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const Matrix& pv = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < pv.cols(); ++c) out(r, offset + c) = pv(r, c);
    offset += pv.cols();
  }
  std::vector<Tensor> saved(parts.begin(), parts.end());
  return parts[0].tape()->record(
      std::move(out), parts, [saved](Tape& tape, const Matrix&, const Matrix& g) {
        std::size_t offset = 0;
        for (const Tensor& p : saved) {
          const std::size_t pc = p.cols();
          if (Matrix* gp = tape.grad_buffer(p)) {
            for (std::size_t r = 0; r < g.rows(); ++r)
              for (std::size_t c = 0; c < pc; ++c) (*gp)(r, c) += g(r, offset + c);
          }
          offset += pc;
        }
      });
}

Tensor concat(std::initializer_list<Tensor> parts) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor reshape(Tensor x, std::size_t rows, std::size_t cols) {
  const Matrix& xv = x.value();
  if (rows * cols != xv.size()) {
    throw ShapeError("reshape: cannot view " + xv.shape_str() + " as (" + std::to_string(rows) +
                     "x" + std::to_string(cols) + ")");
  }
  Matrix out(rows, cols, xv.storage());
  return x.tape()->record(std::move(out), {x}, [x](Tape& tape, const Matrix&, const Matrix& g) {
    Matrix* gx = tape.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
  });
}

Tensor slice_rows(Tensor x, std::size_t begin, std::size_t count) {
  const Matrix& xv = x.value();
  if (begin + count > xv.rows()) {
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of range for " + xv.shape_str());
  }
  const std::size_t n = xv.cols();
  std::vector<double> data(xv.storage().begin() + static_cast<std::ptrdiff_t>(begin * n),
                           xv.storage().begin() + static_cast<std::ptrdiff_t>((begin + count) * n));
  return x.tape()->record(Matrix(count, n, std::move(data)), {x},
                          [x, begin](Tape& tape, const Matrix&, const Matrix& g) {
                            Matrix* gx = tape.grad_buffer(x);
                            const std::size_t off = begin * g.cols();
                            for (std::size_t i = 0; i < g.size(); ++i) (*gx)[off + i] += g[i];
                          });
}

}  // namespace scmwr::ad
