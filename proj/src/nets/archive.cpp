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

#include "pgi/nets/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pgi/common/error.hpp"
#include "pgi/common/rng.hpp"

namespace pgi {

static_assert(std::endian::native == std::endian::little, "archive format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'P', 'G', 'I', 'A', 'R', 'C', 'H', '1'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void write_archive(const std::filesystem::path& path, const Archive& archive) {
  nlohmann::json manifest = archive.manifest;
  nlohmann::json table = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : archive.tensors) {
    table.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}, {"count", t.size()}});
    offset += t.size();
  }
  manifest["tensors"] = std::move(table);
  const std::string text = manifest.dump();

  std::vector<std::uint8_t> bytes(kMagic, kMagic + 8);
  put_u64(bytes, text.size());
  bytes.insert(bytes.end(), text.begin(), text.end());
  for (const auto& [_, t] : archive.tensors) {
    const auto* raw = reinterpret_cast<const std::uint8_t*>(t.ptr());
    bytes.insert(bytes.end(), raw, raw + t.size() * sizeof(float));
  }
  put_u64(bytes, fnv1a64(bytes));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigurationError("cannot open " + tmp + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigurationError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Archive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open archive " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw IntegrityError(where + "not a parameter archive (bad magic or truncated header)");
  const std::uint64_t stored = get_u64(bytes.data() + bytes.size() - 8);
  const std::uint64_t computed = fnv1a64(std::span(bytes.data(), bytes.size() - 8));
  const std::uint64_t manifest_len = get_u64(bytes.data() + 8);
  if (manifest_len > bytes.size() - 24)
    throw IntegrityError(where + "manifest length " + std::to_string(manifest_len) + " exceeds file size " +
                         std::to_string(bytes.size()));

  Archive a;
  try {
    a.manifest = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(manifest_len));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(where + "manifest is not valid JSON (" + e.what() + ")");
  }
  const std::size_t payload_begin = 16 + manifest_len;
  const std::size_t payload_bytes = bytes.size() - 8 - payload_begin;
  std::size_t declared = 0;
  if (a.manifest.contains("tensors"))
    for (const auto& e : a.manifest["tensors"]) declared += e.at("count").get<std::size_t>() * sizeof(float);

  if (stored != computed) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "checksum mismatch (stored %016llx, computed %016llx); ",
                  static_cast<unsigned long long>(stored), static_cast<unsigned long long>(computed));
    throw IntegrityError(where + buf + "manifest declares " + std::to_string(declared) + " payload bytes, file holds " +
                         std::to_string(payload_bytes));
  }
  if (declared != payload_bytes)
    throw IntegrityError(where + "manifest declares " + std::to_string(declared) + " payload bytes, file holds " +
                         std::to_string(payload_bytes));

  for (const auto& e : a.manifest["tensors"]) {
    const auto name = e.at("name").get<std::string>();
    const auto shape = e.at("shape").get<Shape>();
    const auto offset = e.at("offset").get<std::size_t>();
    const auto count = e.at("count").get<std::size_t>();
    if (element_count(shape) != count || (offset + count) * sizeof(float) > payload_bytes)
      throw IntegrityError(where + "tensor table entry '" + name + "' is inconsistent");
    std::vector<float> values(count);
    std::memcpy(values.data(), bytes.data() + payload_begin + offset * sizeof(float), count * sizeof(float));
    a.tensors.emplace(name, Tensor<float>(shape, std::move(values)));
  }
  a.manifest.erase("tensors");
  return a;
}

std::string manifest_diff(const nlohmann::json& expected, const nlohmann::json& actual) {
  std::string out;
  auto note = [&](const std::string& key, const std::string& a, const std::string& b) {
    if (!out.empty()) out += "; ";
    out += key + ": " + a + " != " + b;
  };
  for (const auto& [key, value] : expected.items()) {
    if (!actual.contains(key)) note(key, value.dump(), "<missing>");
    else if (actual[key] != value) note(key, value.dump(), actual[key].dump());
  }
  for (const auto& [key, value] : actual.items())
    if (!expected.contains(key)) note(key, "<missing>", value.dump());
  return out;
}

}  // namespace pgi
