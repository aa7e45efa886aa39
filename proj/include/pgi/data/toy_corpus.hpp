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
#include <string>
#include <vector>

#include "pgi/data/image_io.hpp"

namespace pgi {

/// Shape classes of the procedural corpus, in label order.
const std::vector<std::string>& toy_class_names();

/// One procedural image: a two-colour vertical gradient background with a
/// single filled shape of class `label`.
RgbImage render_toy_image(int label, int resolution, std::uint64_t key);

struct ToyCorpusSpec {
  int train_count = 500;
  int test_count = 100;
  int resolution = 64;
  std::uint64_t seed = 1;
};

/// Writes <dir>/{train,test}/<class>/<index>.png. Deterministic in the spec.
void generate_toy_corpus(const std::filesystem::path& dir, const ToyCorpusSpec& spec);

}  // namespace pgi
