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

#include "scmwr/model.h"

#include <stdexcept>

#include "scmwr/errors.h"
#include "scmwr/init.h"

namespace scmwr {

using ad::Matrix;
using ad::Tensor;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBase: return "base";
    case ModelKind::kLocal: return "lmwr";
    case ModelKind::kRegional: return "rmwr";
    case ModelKind::kGlobal: return "gmwr";
    case ModelKind::kJoint: return "jmwr";
  }
  return "?";
}

std::string_view display_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBase: return "Base";
    case ModelKind::kLocal: return "L-MWR";
    case ModelKind::kRegional: return "R-MWR";
    case ModelKind::kGlobal: return "G-MWR";
    case ModelKind::kJoint: return "J-MWR";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (ModelKind k : kAllModelKinds) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown model kind '" + std::string(name) +
                    "' (expected base, lmwr, rmwr, gmwr or jmwr)");
}

bool uses_tanh_head(ModelKind kind) { return kind != ModelKind::kBase; }

namespace {

std::string prefix_of(ModelKind kind) {
  return kind == ModelKind::kJoint ? "joint." : std::string(to_string(kind)) + ".";
}

std::string block_name(const std::string& prefix, std::size_t i) {
  return prefix + "block" + std::to_string(i);
}

void add_dense(ParamMap& params, const std::string& name, std::size_t in, std::size_t out,
               Rng& rng) {
  params[name + ".w"] = ad::glorot_uniform(in, out, rng);
  params[name + ".b"] = Matrix(1, out);
}

void add_block(ParamMap& params, const std::string& prefix, std::size_t width, Rng& rng) {
  add_dense(params, prefix + ".fc1", width, width, rng);
  params[prefix + ".ln1.gamma"] = Matrix(1, width, 1.0);
  params[prefix + ".ln1.beta"] = Matrix(1, width);
  add_dense(params, prefix + ".fc2", width, width, rng);
  params[prefix + ".ln2.gamma"] = Matrix(1, width, 1.0);
  params[prefix + ".ln2.beta"] = Matrix(1, width);
}

void add_extractor(ParamMap& params, const std::string& prefix, std::size_t in_width,
                   std::size_t width, Rng& rng) {
  add_dense(params, prefix + "in", in_width, width, rng);
  for (std::size_t i = 0; i < arch::kBlocks; ++i) add_block(params, block_name(prefix, i), width, rng);
}

void add_comparison_head(ParamMap& params, const std::string& prefix, std::size_t width,
                         std::size_t feature_width, Rng& rng) {
  add_dense(params, prefix + "feature", width, feature_width, rng);
  params[prefix + "threshold"] = Matrix(1, 1);
  add_dense(params, prefix + "head", 1, 1, rng);
}

void add_params(ParamMap& params, ModelKind kind, Rng& rng) {
  const std::string prefix = prefix_of(kind);
  switch (kind) {
    case ModelKind::kBase:
      add_extractor(params, prefix, kNumFeatures, arch::kBaseWidth, rng);
      add_dense(params, prefix + "head", arch::kBaseWidth, 1, rng);
      break;
    case ModelKind::kLocal:
      add_extractor(params, prefix, 2, arch::kLocalWidth, rng);
      add_comparison_head(params, prefix, arch::kLocalWidth, 1, rng);
      break;
    case ModelKind::kRegional:
      add_extractor(params, prefix, kRegionalWidth, arch::kPairWidth, rng);
      add_comparison_head(params, prefix, arch::kPairWidth, arch::kPairWidth, rng);
      break;
    case ModelKind::kGlobal:
      add_extractor(params, prefix, kNumFeatures, arch::kPairWidth, rng);
      add_comparison_head(params, prefix, arch::kPairWidth, arch::kPairWidth, rng);
      break;
    case ModelKind::kJoint:
      add_dense(params, prefix + "w_local", 1, 1, rng);
      add_dense(params, prefix + "w_regional", 1, 1, rng);
      add_dense(params, prefix + "w_global", 1, 1, rng);
      add_dense(params, prefix + "head", 3, 1, rng);
      break;
  }
}

}  // namespace

std::size_t ModelBundle::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : params) n += m.size();
  return n;
}

std::size_t ModelBundle::embedding_width() const {
  switch (kind) {
    case ModelKind::kBase: return arch::kBaseWidth;
    case ModelKind::kLocal: return arch::kLocalPairs;
    case ModelKind::kRegional:
    case ModelKind::kGlobal: return arch::kPairWidth;
    case ModelKind::kJoint: return 3;
  }
  return 0;
}

ModelBundle make_model(ModelKind kind, std::uint64_t seed) {
  if (kind == ModelKind::kJoint) {
    const Rng root(seed);
    return make_joint(make_model(ModelKind::kLocal, root.split(1).next_u64()),
                      make_model(ModelKind::kRegional, root.split(2).next_u64()),
                      make_model(ModelKind::kGlobal, root.split(3).next_u64()), seed);
  }
  ModelBundle m;
  m.kind = kind;
  Rng rng(seed);
  add_params(m.params, kind, rng);
  return m;
}

ModelBundle make_joint(const ModelBundle& local, const ModelBundle& regional,
                       const ModelBundle& global, std::uint64_t seed) {
  if (local.kind != ModelKind::kLocal || regional.kind != ModelKind::kRegional ||
      global.kind != ModelKind::kGlobal) {
    throw ConfigError("J-MWR needs lmwr, rmwr and gmwr sub-models, got " +
                      std::string(to_string(local.kind)) + ", " +
                      std::string(to_string(regional.kind)) + ", " +
                      std::string(to_string(global.kind)));
  }
  ModelBundle m;
  m.kind = ModelKind::kJoint;
  m.gate = local.gate;
  for (const ModelBundle* sub : {&local, &regional, &global}) {
    m.params.insert(sub->params.begin(), sub->params.end());
  }
  Rng rng(seed);
  add_params(m.params, ModelKind::kJoint, rng);
  return m;
}

bool is_joint_head_param(std::string_view name) { return name.starts_with("joint."); }

// ---- inputs ---------------------------------------------------------------------

ModelInputs build_inputs(ModelKind kind, std::span<const Features> normalized) {
  const std::size_t b = normalized.size();
  ModelInputs in;
  in.batch = b;
  const bool joint = kind == ModelKind::kJoint;
  if (kind == ModelKind::kBase) {
    in.base = Matrix(b, kNumFeatures);
    for (std::size_t r = 0; r < b; ++r) {
      const Features& f = layout_base(normalized[r]);
      std::copy(f.begin(), f.end(), in.base.values().begin() + static_cast<std::ptrdiff_t>(r * kNumFeatures));
    }
  }
  if (kind == ModelKind::kLocal || joint) {
    in.local = Matrix(b * kLocalInputs, 2);
    for (std::size_t r = 0; r < b; ++r) {
      const LocalLayout l = layout_local(normalized[r]);
      for (std::size_t k = 0; k < kLocalInputs; ++k) {
        in.local(r * kLocalInputs + k, 0) = l[k][0];
        in.local(r * kLocalInputs + k, 1) = l[k][1];
      }
    }
  }
  if (kind == ModelKind::kRegional || joint) {
    in.left = Matrix(b, kRegionalWidth);
    in.right = Matrix(b, kRegionalWidth);
    for (std::size_t r = 0; r < b; ++r) {
      const auto [l, rt] = layout_regional(normalized[r]);
      for (std::size_t c = 0; c < kRegionalWidth; ++c) {
        in.left(r, c) = l[c];
        in.right(r, c) = rt[c];
      }
    }
  }
  if (kind == ModelKind::kGlobal || joint) {
    in.original = Matrix(b, kNumFeatures);
    in.swapped = Matrix(b, kNumFeatures);
    for (std::size_t r = 0; r < b; ++r) {
      const auto [o, s] = layout_global(normalized[r]);
      for (std::size_t c = 0; c < kNumFeatures; ++c) {
        in.original(r, c) = o[c];
        in.swapped(r, c) = s[c];
      }
    }
  }
  return in;
}

ModelInputs global_inputs(std::span<const Features> original, std::span<const Features> swapped) {
  if (original.size() != swapped.size()) {
    throw std::invalid_argument("global_inputs: original and swapped batch sizes differ");
  }
  for (std::size_t r = 0; r < original.size(); ++r) {
    if (breast_swap(original[r]) != swapped[r]) {
      throw std::invalid_argument("global_inputs: row " + std::to_string(r) +
                                  " is not the breast swap of its original");
    }
  }
  return build_inputs(ModelKind::kGlobal, original);
}

// ---- binder -------------------------------------------------------------------------

ParamBinder::ParamBinder(ad::Tape& tape, const ParamMap& params, bool requires_grad)
    : tape_(tape), params_(params), requires_grad_(requires_grad) {}

Tensor ParamBinder::operator()(std::string_view name) {
  if (auto it = bound_.find(name); it != bound_.end()) return it->second;
  auto pit = params_.find(name);
  if (pit == params_.end()) throw ConfigError("model has no parameter '" + std::string(name) + "'");
  Tensor t = tape_.parameter(pit->second, requires_grad_);
  bound_.emplace(std::string(name), t);
  return t;
}

// ---- forward ------------------------------------------------------------------------

Tensor dense_forward(ParamBinder& p, const std::string& prefix, Tensor x) {
  return ad::add_row(ad::matmul(x, p(prefix + ".w")), p(prefix + ".b"));
}

Tensor mwr_block_forward(ParamBinder& p, const std::string& prefix, Tensor x) {
  const std::size_t width = p(prefix + ".fc1.w").rows();
  if (x.cols() != width) {
    throw ShapeError("MWR-Block " + prefix + ": input width " + std::to_string(x.cols()) +
                     " != block width " + std::to_string(width));
  }
  Tensor h = dense_forward(p, prefix + ".fc1", x);
  h = ad::relu(ad::layer_norm(h, p(prefix + ".ln1.gamma"), p(prefix + ".ln1.beta"),
                              arch::kLayerNormEps));
  h = dense_forward(p, prefix + ".fc2", h);
  h = ad::relu(ad::layer_norm(h, p(prefix + ".ln2.gamma"), p(prefix + ".ln2.beta"),
                              arch::kLayerNormEps));
  return ad::add(x, h);
}

namespace {

Tensor extractor_forward(ParamBinder& p, const std::string& prefix, Tensor x) {
  const std::size_t in_width = p(prefix + "in.w").rows();
  if (x.cols() != in_width) {
    throw ShapeError(prefix + " extractor expects width " + std::to_string(in_width) + ", got " +
                     std::to_string(x.cols()));
  }
  Tensor h = dense_forward(p, prefix + "in", x);
  for (std::size_t i = 0; i < arch::kBlocks; ++i) h = mwr_block_forward(p, block_name(prefix, i), h);
  return h;
}

const Matrix& local_pair_matrix() {
  static const Matrix m = [] {
    Matrix sel(kLocalInputs, arch::kLocalPairs);
    const auto& pairs = local_pairs();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      sel(pairs[k].first, k) = 1.0;
      sel(pairs[k].second, k) = -1.0;
    }
    return sel;
  }();
  return m;
}

ModelOutput pair_forward(ParamBinder& p, const std::string& prefix, Tensor a, Tensor b,
                         const GateConfig& gate) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(prefix + ": paired inputs differ in shape");
  }
  auto embed = [&](Tensor x) {
    return ad::l2_normalize(ad::relu(dense_forward(p, prefix + "feature",
                                                   extractor_forward(p, prefix, x))),
                            arch::kL2Eps);
  };
  Tensor ea = embed(a);
  Tensor eb = embed(b);
  Tensor d = ad::threshold_gate(ad::abs(ad::sub(ea, eb)), p(prefix + "threshold"), gate.mode,
                                gate.steepness);
  Tensor score = ad::tanh(dense_forward(p, prefix + "head", ad::row_sum(d)));
  return {score, d};
}

}  // namespace

const std::vector<std::pair<std::size_t, std::size_t>>& local_pairs() {
  static const auto pairs = [] {
    std::vector<std::pair<std::size_t, std::size_t>> v;
    for (std::size_t i = 0; i < kLocalInputs; ++i)
      for (std::size_t j = i + 1; j < kLocalInputs; ++j) v.emplace_back(i, j);
    return v;
  }();
  return pairs;
}

ModelOutput base_forward(ParamBinder& p, Tensor x) {
  if (x.cols() != kNumFeatures) {
    throw ShapeError("base model expects 44 features, got " + std::to_string(x.cols()));
  }
  Tensor emb = extractor_forward(p, "base.", x);
  return {ad::sigmoid(dense_forward(p, "base.head", emb)), emb};
}

ModelOutput lmwr_forward(ParamBinder& p, Tensor points, const GateConfig& gate) {
  if (points.cols() != 2 || points.rows() % kLocalInputs != 0) {
    throw ShapeError("L-MWR expects 18 (skin, internal) inputs per exam, got " +
                     points.value().shape_str());
  }
  const std::size_t batch = points.rows() / kLocalInputs;
  Tensor f = ad::relu(dense_forward(p, "lmwr.feature", extractor_forward(p, "lmwr.", points)));
  Tensor per_exam = ad::reshape(f, batch, kLocalInputs);
  Tensor diffs = ad::matmul(per_exam, p.tape().parameter(local_pair_matrix(), false));
  Tensor gated = ad::threshold_gate(ad::abs(diffs), p("lmwr.threshold"), gate.mode, gate.steepness);
  Tensor score = ad::tanh(dense_forward(p, "lmwr.head", ad::row_mean(gated)));
  return {score, gated};
}

ModelOutput rmwr_forward(ParamBinder& p, Tensor left, Tensor right, const GateConfig& gate) {
  if (left.cols() != kRegionalWidth || right.cols() != kRegionalWidth) {
    throw ShapeError("R-MWR expects two 24-wide inputs");
  }
  return pair_forward(p, "rmwr.", left, right, gate);
}

ModelOutput gmwr_forward(ParamBinder& p, Tensor original, Tensor swapped, const GateConfig& gate) {
  if (original.cols() != kNumFeatures || swapped.cols() != kNumFeatures) {
    throw ShapeError("G-MWR expects two 44-wide inputs");
  }
  return pair_forward(p, "gmwr.", original, swapped, gate);
}

ModelOutput jmwr_forward(ParamBinder& p, const ModelInputs& in, const GateConfig& gate) {
  ad::Tape& tape = p.tape();
  Tensor sl = lmwr_forward(p, tape.constant(in.local), gate).score;
  Tensor sr = rmwr_forward(p, tape.constant(in.left), tape.constant(in.right), gate).score;
  Tensor sg = gmwr_forward(p, tape.constant(in.original), tape.constant(in.swapped), gate).score;
  Tensor weighted = ad::concat({dense_forward(p, "joint.w_local", sl),
                                dense_forward(p, "joint.w_regional", sr),
                                dense_forward(p, "joint.w_global", sg)});
  return {ad::tanh(dense_forward(p, "joint.head", weighted)), weighted};
}

ModelOutput forward(ParamBinder& p, ModelKind kind, const ModelInputs& in, const GateConfig& gate) {
  ad::Tape& tape = p.tape();
  switch (kind) {
    case ModelKind::kBase: return base_forward(p, tape.constant(in.base));
    case ModelKind::kLocal: return lmwr_forward(p, tape.constant(in.local), gate);
    case ModelKind::kRegional:
      return rmwr_forward(p, tape.constant(in.left), tape.constant(in.right), gate);
    case ModelKind::kGlobal:
      return gmwr_forward(p, tape.constant(in.original), tape.constant(in.swapped), gate);
    case ModelKind::kJoint: return jmwr_forward(p, in, gate);
  }
  throw std::logic_error("unreachable");
}

Predictions predict(const ModelBundle& model, std::span<const Features> normalized,
                    bool with_embeddings, std::size_t chunk) {
  Predictions out;
  out.scores.reserve(normalized.size());
  for (std::size_t start = 0; start < normalized.size(); start += chunk) {
    const std::size_t n = std::min(chunk, normalized.size() - start);
    const ModelInputs in = build_inputs(model.kind, normalized.subspan(start, n));
    ad::Tape tape;
    ParamBinder binder(tape, model.params, false);
    const ModelOutput o = forward(binder, model.kind, in, model.gate);
    const Matrix& s = o.score.value();
    for (std::size_t r = 0; r < n; ++r) out.scores.push_back(s[r]);
    if (with_embeddings) {
      const Matrix& e = o.embedding.value();
      for (std::size_t r = 0; r < n; ++r) {
        auto row = e.row_span(r);
        out.embeddings.emplace_back(row.begin(), row.end());
      }
    }
  }
  return out;
}

}  // namespace scmwr
