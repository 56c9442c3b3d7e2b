// Copyright 2026 The qmlp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * JSON checkpoints.
 *
 * A checkpoint is one JSON document:
 *
 *   {
 *     "format": "qmlp-checkpoint", "version": 1,
 *     "model": "vqc-mlpnet", "seed": 0,
 *     "dims": {"input_dim": D, "hidden": M, "classes": J, "qubits": U, "depth": L,
 *              "train_w1": false, "entangler": "ring", "rotation_order": "xyz"},
 *     "arrays": {"<name>": {"rows": r, "cols": c, "data": "<base64>"}, ...},
 *     "header": {...}            // optional provenance block
 *   }
 *
 * Array payloads are base64 of little-endian IEEE-754 float64 values in
 * column-major order.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qmlp/model.hpp"

namespace qmlp {

std::string base64_encode_doubles(std::span<const double> values);
std::vector<double> base64_decode_doubles(std::string_view text);

struct Checkpoint {
    AnyModel model;
    std::uint64_t seed = 0;
};

/// `header_json` must be a JSON object text (or empty).
std::string checkpoint_to_json(const AnyModel& model, std::uint64_t seed,
                               std::string_view header_json = {});
Checkpoint checkpoint_from_json(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const AnyModel& model, std::uint64_t seed,
                     std::string_view header_json = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string entangler_name(Entangler e);
Entangler parse_entangler(std::string_view name);
std::string rotation_order_name(RotationOrder o);
RotationOrder parse_rotation_order(std::string_view name);

}  // namespace qmlp
