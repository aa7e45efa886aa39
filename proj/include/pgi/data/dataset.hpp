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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgi/tensor/tensor.hpp"

namespace pgi {

enum class Split { train, val, test };

std::string to_string(Split split);
Split parse_split(const std::string& name);

struct ImageRecord {
  std::string relative_path;  // generic '/' separators
  std::uint64_t byte_size = 0;
  std::uint64_t checksum = 0;  // FNV-1a 64 of the file bytes

  bool operator==(const ImageRecord&) const = default;
};

struct SkippedFile {
  std::string relative_path;
  std::string reason;
};

/// Immutable, lexicographically ordered image index of one split.
struct DatasetManifest {
  std::filesystem::path root;
  Split split = Split::train;
  std::vector<ImageRecord> records;
  std::vector<SkippedFile> skipped;

  std::size_t size() const noexcept { return records.size(); }
  std::filesystem::path path_of(std::size_t i) const { return root / records.at(i).relative_path; }
};

/// Seed behind validation/test subsampling when `max_images` caps a split.
inline constexpr std::uint64_t kSubsampleSeed = 0x5eed'0f'1a7e;

struct IndexOptions {
  /// 0 keeps every image; otherwise a seeded subset of this size is kept
  /// (still reported in lexicographic order).
  std::size_t max_images = 0;
  std::uint64_t subsample_seed = kSubsampleSeed;
};

/// Indexes `root/<split>` when that directory exists, else `root` itself,
/// recursively. PNG and JPEG files are decoded once to validate them;
/// undecodable ones go to the skip report.
DatasetManifest index_dataset(const std::filesystem::path& root, Split split, const IndexOptions& options = {});

nlohmann::json to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);

/// Decodes, centre-crops and resizes the listed images into an
/// N×3×R×R batch in [-1, 1].
Tensor<float> load_batch(const DatasetManifest& manifest, std::span<const std::size_t> indices, int resolution);

/// Keyed Fisher-Yates permutation of [0, n).
std::vector<std::size_t> epoch_order(std::uint64_t seed, std::uint64_t epoch, std::size_t n);

/// Class labels from the first directory component of each record
/// ("circle/0001.png" → index of "circle" in the sorted class list).
std::vector<int> labels_from_directories(const DatasetManifest& manifest, std::vector<std::string>* class_names);

}  // namespace pgi
