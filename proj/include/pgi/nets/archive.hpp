/* Copyright 2026 The pgi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "pgi/tensor/tensor.hpp"

namespace pgi {

/// Single-file parameter archive.
///
/// Layout (little-endian):
///   8 bytes  magic "PGIARCH1"
///   8 bytes  manifest length L
///   L bytes  manifest (UTF-8 JSON; carries a "tensors" table of
///            {name, shape, offset, count} into the payload)
///   ...      payload: float32 values of every tensor, in name order
///   8 bytes  FNV-1a 64 of all preceding bytes
///
/// Tensor bytes are copied verbatim, so save/load round-trips bit-exactly.
struct Archive {
  nlohmann::json manifest = nlohmann::json::object();
  std::map<std::string, Tensor<float>> tensors;
};

void write_archive(const std::filesystem::path& path, const Archive& archive);
/// Throws IntegrityError on truncation, bad magic, checksum mismatch or an
/// inconsistent tensor table.
Archive read_archive(const std::filesystem::path& path);

/// Human-readable list of top-level keys whose values differ ("key: a != b").
std::string manifest_diff(const nlohmann::json& expected, const nlohmann::json& actual);

}  // namespace pgi
