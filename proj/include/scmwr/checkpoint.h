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

// Text checkpoints: one JSON document holding the parameters together with
// everything needed to reuse them (normalization, gate, seed, config).

#include <cstdint>
#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "scmwr/data.h"
#include "scmwr/model.h"

namespace scmwr {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelBundle model;
  NormStats norm;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
// Throws DataError on malformed documents, version mismatch or parameters
// that do not match the architecture of the recorded kind.
Checkpoint checkpoint_from_json(const nlohmann::json& j, std::string_view source = "<json>");

// Written atomically; doubles use shortest round-trip decimal form.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
// With `expected` set, a different recorded kind is a ConfigError.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<ModelKind> expected = std::nullopt);

}  // namespace scmwr
