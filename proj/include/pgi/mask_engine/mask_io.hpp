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
#include <string>

#include "pgi/mask_engine/mask.hpp"

namespace pgi {

/// Single-channel PNG, hole = 255, valid = 0.
void write_mask_png(const Mask& mask, const std::filesystem::path& path);
/// Any non-zero pixel is a hole. Colour images are reduced to grey first.
Mask read_mask_png(const std::filesystem::path& path);

/// Run-length text form "H W; r0 r1 r2 ...". Runs cover the grid in
/// row-major order, alternate valid/hole and always start with a
/// (possibly zero-length) valid run.
std::string encode_mask_rle(const Mask& mask);
Mask decode_mask_rle(const std::string& text);

}  // namespace pgi
