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

#include "pgi/tensor/tensor.hpp"

namespace pgi {

/// 8-bit RGB image, interleaved, row-major.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int h, int w) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, 0) {}
  std::uint8_t* at(int row, int col) { return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3; }
  const std::uint8_t* at(int row, int col) const {
    return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3;
  }
};

/// Decodes PNG or JPEG bytes. Returns an empty image when undecodable.
RgbImage decode_image(std::span<const std::uint8_t> bytes);
RgbImage read_image(const std::filesystem::path& path);
void write_png(const RgbImage& image, const std::filesystem::path& path);

/// Largest centred square.
RgbImage center_crop_square(const RgbImage& image);

/// Half-pixel-centre bilinear resize with edge clamping on a float plane
/// set (channels × h × w).
std::vector<double> resize_bilinear_planes(std::span<const double> planes, int channels, int in_h, int in_w, int out_h,
                                           int out_w);

/// Centre crop, bilinear resize to resolution², scale to [-1, 1], RGB
/// channel order. Writes one 3×R×R sample into `out` at batch slot `n`.
void image_to_tensor(const RgbImage& image, int resolution, Tensor<float>& out, int n);

/// Sample `n` of an N×3×H×W tensor in [-1, 1] back to 8-bit RGB (rounded, clamped).
RgbImage tensor_to_image(const Tensor<float>& batch, int n);

}  // namespace pgi
