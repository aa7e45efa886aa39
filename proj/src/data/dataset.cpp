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

#include "pgi/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>

#include "pgi/common/error.hpp"
#include "pgi/common/rng.hpp"
#include "pgi/data/image_io.hpp"

namespace pgi {

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ParameterError("unknown split '" + name + "' (expected train, val or test)");
}

namespace {

bool is_image_file(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

DatasetManifest index_dataset(const std::filesystem::path& root, Split split, const IndexOptions& options) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw ConfigurationError("dataset root " + root.string() + " is not a directory");
  DatasetManifest m;
  m.split = split;
  m.root = fs::is_directory(root / to_string(split)) ? root / to_string(split) : root;

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(m.root))
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
  std::vector<std::pair<std::string, fs::path>> named;
  for (const auto& f : files) named.emplace_back(fs::relative(f, m.root).generic_string(), f);
  std::sort(named.begin(), named.end());

  for (const auto& [rel, path] : named) {
    const auto bytes = read_bytes(path);
    if (decode_image(bytes).pixels.empty()) {
      m.skipped.push_back({rel, "undecodable image"});
      continue;
    }
    m.records.push_back({rel, bytes.size(), fnv1a64(bytes)});
  }
  if (m.records.empty())
    throw ConfigurationError("dataset " + m.root.string() + " contains no decodable PNG/JPEG images");

  if (options.max_images > 0 && options.max_images < m.records.size()) {
    auto order = epoch_order(options.subsample_seed, stream::kSubsample, m.records.size());
    order.resize(options.max_images);
    std::sort(order.begin(), order.end());
    std::vector<ImageRecord> kept;
    for (auto i : order) kept.push_back(m.records[i]);
    m.records = std::move(kept);
  }
  return m;
}

nlohmann::json to_json(const DatasetManifest& manifest) {
  nlohmann::json j;
  j["root"] = manifest.root.generic_string();
  j["split"] = to_string(manifest.split);
  auto& recs = j["records"] = nlohmann::json::array();
  for (const auto& r : manifest.records) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(r.checksum));
    recs.push_back({{"path", r.relative_path}, {"bytes", r.byte_size}, {"fnv1a64", hex}});
  }
  auto& skipped = j["skipped"] = nlohmann::json::array();
  for (const auto& s : manifest.skipped) skipped.push_back({{"path", s.relative_path}, {"reason", s.reason}});
  return j;
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  m.root = j.at("root").get<std::string>();
  m.split = parse_split(j.at("split").get<std::string>());
  for (const auto& r : j.at("records"))
    m.records.push_back({r.at("path").get<std::string>(), r.at("bytes").get<std::uint64_t>(),
                         std::stoull(r.at("fnv1a64").get<std::string>(), nullptr, 16)});
  for (const auto& s : j.value("skipped", nlohmann::json::array()))
    m.skipped.push_back({s.at("path").get<std::string>(), s.at("reason").get<std::string>()});
  return m;
}

Tensor<float> load_batch(const DatasetManifest& manifest, std::span<const std::size_t> indices, int resolution) {
  if (resolution <= 0) throw ParameterError("load_batch: resolution must be positive");
  Tensor<float> out({static_cast<int>(indices.size()), 3, resolution, resolution});
  for (std::size_t n = 0; n < indices.size(); ++n) {
    if (indices[n] >= manifest.size())
      throw ParameterError("load_batch: index " + std::to_string(indices[n]) + " out of range (size " +
                           std::to_string(manifest.size()) + ")");
    image_to_tensor(read_image(manifest.path_of(indices[n])), resolution, out, static_cast<int>(n));
  }
  return out;
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::uint64_t epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed, {stream::kEpochOrder, epoch});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

std::vector<int> labels_from_directories(const DatasetManifest& manifest, std::vector<std::string>* class_names) {
  std::map<std::string, int> classes;
  std::vector<std::string> dirs;
  for (const auto& r : manifest.records) {
    const auto slash = r.relative_path.find('/');
    dirs.push_back(slash == std::string::npos ? std::string() : r.relative_path.substr(0, slash));
    classes.emplace(dirs.back(), 0);
  }
  int next = 0;
  for (auto& [name, idx] : classes) idx = next++;
  if (class_names) {
    class_names->clear();
    for (const auto& [name, _] : classes) class_names->push_back(name);
  }
  std::vector<int> labels;
  for (const auto& d : dirs) labels.push_back(classes[d]);
  return labels;
}

}  // namespace pgi
