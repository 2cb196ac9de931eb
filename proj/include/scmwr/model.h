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

// The five architectures: Base, L-MWR, R-MWR, G-MWR and J-MWR.
//
// Every architecture is built from MWR-Blocks,
//   y = x + relu(ln2(fc2(relu(ln1(fc1(x)))))),
// preceded by a linear input projection that lifts the raw input width to the
// block width. Parameters live in a name-keyed map; each model kind owns a
// prefix ("base.", "lmwr.", "rmwr.", "gmwr.", "joint.") so a J-MWR bundle is
// the union of its three sub-models plus its own head.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scmwr/data.h"
#include "scmwr/tensor.h"

namespace scmwr {

enum class ModelKind { kBase, kLocal, kRegional, kGlobal, kJoint };

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::kBase, ModelKind::kLocal,
                                               ModelKind::kRegional, ModelKind::kGlobal,
                                               ModelKind::kJoint};

// "base", "lmwr", "rmwr", "gmwr", "jmwr".
std::string_view to_string(ModelKind kind);
// "Base", "L-MWR", ...
std::string_view display_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
bool uses_tanh_head(ModelKind kind);

namespace arch {
inline constexpr std::size_t kBlocks = 4;
inline constexpr std::size_t kBaseWidth = 256;
inline constexpr std::size_t kLocalWidth = 64;
inline constexpr std::size_t kPairWidth = 256;  // R-MWR and G-MWR
inline constexpr std::size_t kLocalPairs = kLocalInputs * (kLocalInputs - 1) / 2;
inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kL2Eps = 1e-12;
}  // namespace arch

using ParamMap = std::map<std::string, ad::Matrix, std::less<>>;

struct GateConfig {
  ad::GateMode mode = ad::GateMode::kSoft;
  double steepness = 10.0;
};

struct ModelBundle {
  ModelKind kind = ModelKind::kBase;
  ParamMap params;
  GateConfig gate;

  std::size_t parameter_count() const;
  // Width of the embedding hook.
  std::size_t embedding_width() const;
};

// Glorot-uniform weights, zero biases, layer-norm gamma 1 / beta 0, gate
// threshold 0. All draws come from Rng(seed) in a fixed order.
ModelBundle make_model(ModelKind kind, std::uint64_t seed);

// J-MWR around three trained sub-models. Only the joint.* head is freshly
// initialized from `seed`. Throws ConfigError when a sub-model has the wrong kind.
ModelBundle make_joint(const ModelBundle& local, const ModelBundle& regional,
                       const ModelBundle& global, std::uint64_t seed);

// Parameters introduced by J-MWR itself (the weighting layers and final head).
bool is_joint_head_param(std::string_view name);

// Batched inputs for B exams. Only the layouts a kind consumes are filled.
struct ModelInputs {
  std::size_t batch = 0;
  ad::Matrix base;      // B x 44
  ad::Matrix local;     // 18B x 2, exam-major
  ad::Matrix left;      // B x 24
  ad::Matrix right;     // B x 24
  ad::Matrix original;  // B x 44
  ad::Matrix swapped;   // B x 44
};

ModelInputs build_inputs(ModelKind kind, std::span<const Features> normalized);
// G-MWR inputs from explicitly supplied pairs. Throws std::invalid_argument
// unless every swapped row equals breast_swap of its original row.
ModelInputs global_inputs(std::span<const Features> original, std::span<const Features> swapped);

// Binds parameters of one bundle onto a tape, one leaf per name.
class ParamBinder {
 public:
  ParamBinder(ad::Tape& tape, const ParamMap& params, bool requires_grad = true);

  ad::Tensor operator()(std::string_view name);
  ad::Tape& tape() { return tape_; }
  // Leaves bound so far, keyed by parameter name.
  const std::map<std::string, ad::Tensor, std::less<>>& bound() const { return bound_; }

 private:
  ad::Tape& tape_;
  const ParamMap& params_;
  bool requires_grad_;
  std::map<std::string, ad::Tensor, std::less<>> bound_;
};

struct ModelOutput {
  ad::Tensor score;      // B x 1
  ad::Tensor embedding;  // B x embedding_width
};

ad::Tensor dense_forward(ParamBinder& p, const std::string& prefix, ad::Tensor x);
ad::Tensor mwr_block_forward(ParamBinder& p, const std::string& prefix, ad::Tensor x);

// Sigmoid head over the post-block-4 activations; embedding = those activations.
ModelOutput base_forward(ParamBinder& p, ad::Tensor x);
// points: 18B x 2. Embedding = 153 gated pair differences (i < j order).
ModelOutput lmwr_forward(ParamBinder& p, ad::Tensor points, const GateConfig& gate);
// Embedding = gated |e_left - e_right| of the l2-normalized extractor outputs.
ModelOutput rmwr_forward(ParamBinder& p, ad::Tensor left, ad::Tensor right,
                         const GateConfig& gate);
ModelOutput gmwr_forward(ParamBinder& p, ad::Tensor original, ad::Tensor swapped,
                         const GateConfig& gate);
// Embedding = the three weighted sub-scores (B x 3).
ModelOutput jmwr_forward(ParamBinder& p, const ModelInputs& in, const GateConfig& gate);

ModelOutput forward(ParamBinder& p, ModelKind kind, const ModelInputs& in,
                    const GateConfig& gate);

struct Predictions {
  std::vector<double> scores;
  std::vector<std::vector<double>> embeddings;  // filled only on request
};

// Gradient-free evaluation in chunks.
Predictions predict(const ModelBundle& model, std::span<const Features> normalized,
                    bool with_embeddings = false, std::size_t chunk = 256);

// The 153 x 18 pair order used by L-MWR: pair k = (i, j), i < j, lexicographic.
const std::vector<std::pair<std::size_t, std::size_t>>& local_pairs();

}  // namespace scmwr
