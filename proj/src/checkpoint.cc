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

#include "scmwr/checkpoint.h"

#include <string>

#include "scmwr/errors.h"
#include "scmwr/io.h"

namespace scmwr {
namespace {

using nlohmann::json;

std::string_view gate_mode_name(ad::GateMode m) { return m == ad::GateMode::kSoft ? "soft" : "hard"; }

}  // namespace

json checkpoint_to_json(const Checkpoint& c) {
  json params = json::object();
  for (const auto& [name, m] : c.model.params) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const auto row = m.row_span(r);
      rows.push_back(json(std::vector<double>(row.begin(), row.end())));
    }
    params[name] = std::move(rows);
  }
  return json{{"version", kCheckpointVersion},
              {"kind", to_string(c.model.kind)},
              {"seed", c.seed},
              {"gate", {{"mode", gate_mode_name(c.model.gate.mode)},
                        {"steepness", c.model.gate.steepness}}},
              {"normalization", c.norm},
              {"config", c.config},
              {"params", std::move(params)}};
}

Checkpoint checkpoint_from_json(const json& j, std::string_view source) {
  const std::string where(source);
  try {
    if (!j.is_object()) throw DataError(where + ": checkpoint is not a JSON object");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw DataError(where + ": checkpoint version " + std::to_string(version) +
                      ", expected " + std::to_string(kCheckpointVersion));
    }
    Checkpoint c;
    ModelKind kind;
    try {
      kind = parse_model_kind(j.at("kind").get<std::string>());
    } catch (const ConfigError& e) {
      throw DataError(where + ": " + e.what());
    }
    c.seed = j.at("seed").get<std::uint64_t>();
    c.config = j.value("config", json::object());
    c.norm = j.at("normalization").get<NormStats>();

    // The reference architecture fixes names and shapes.
    ModelBundle ref = make_model(kind, 0);
    const json& gate = j.at("gate");
    const std::string mode = gate.at("mode").get<std::string>();
    if (mode != "soft" && mode != "hard") throw DataError(where + ": gate mode '" + mode + "'");
    ref.gate.mode = mode == "soft" ? ad::GateMode::kSoft : ad::GateMode::kHard;
    ref.gate.steepness = gate.at("steepness").get<double>();

    const json& params = j.at("params");
    if (params.size() != ref.params.size()) {
      throw DataError(where + ": " + std::to_string(params.size()) + " parameters, expected " +
                      std::to_string(ref.params.size()) + " for " + std::string(to_string(kind)));
    }
    for (auto& [name, m] : ref.params) {
      auto it = params.find(name);
      if (it == params.end()) throw DataError(where + ": missing parameter " + name);
      const json& rows = *it;
      if (!rows.is_array() || rows.size() != m.rows()) {
        throw DataError(where + ": parameter " + name + " has wrong row count");
      }
      for (std::size_t r = 0; r < m.rows(); ++r) {
        const json& row = rows[r];
        if (!row.is_array() || row.size() != m.cols()) {
          throw DataError(where + ": parameter " + name + " row " + std::to_string(r) +
                          " has wrong length");
        }
        for (std::size_t col = 0; col < m.cols(); ++col) {
          if (!row[col].is_number()) {
            throw DataError(where + ": parameter " + name + "[" + std::to_string(r) + "][" +
                            std::to_string(col) + "] is not a number");
          }
          m(r, col) = row[col].get<double>();
        }
      }
    }
    c.model = std::move(ref);
    return c;
  } catch (const json::exception& e) {
    throw DataError(where + ": malformed checkpoint: " + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_to_json(ckpt).dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<ModelKind> expected) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": malformed checkpoint at byte " + std::to_string(e.byte) +
                    ": " + e.what());
  }
  Checkpoint c = checkpoint_from_json(j, path.string());
  if (expected && *expected != c.model.kind) {
    throw ConfigError(path.string() + ": checkpoint holds " +
                      std::string(to_string(c.model.kind)) + ", expected " +
                      std::string(to_string(*expected)));
  }
  return c;
}

}  // namespace scmwr
