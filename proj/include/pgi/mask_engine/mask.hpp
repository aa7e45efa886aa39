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
#include <string>
#include <vector>

namespace pgi {

enum class MaskKind { center_rect, free_form };

enum class ModelFamily { custom, context_encoder, free_form };

std::string to_string(ModelFamily family);
/// Accepts "custom", "ce"/"context_encoder", "gated"/"free_form".
ModelFamily parse_model_family(const std::string& name);

/// Parameters of a mask generator. size_fraction is the linear extent of
/// the hole relative to the image side and never exceeds one half.
struct MaskSpec {
  MaskKind kind = MaskKind::center_rect;
  double size_fraction = 0.0;
  int stroke_count = 0;
  int max_stroke_width = 0;
  int max_orientation_turns = 0;

  static MaskSpec center_rect(double fraction);
  /// Free-form difficulty knob: width = round(f·R/2), count = max(1, round(8f)).
  /// A zero fraction yields the degenerate zero-stroke spec.
  static MaskSpec free_form_for_fraction(double fraction, int resolution, int max_turns = 4);

  void validate() const;
  std::string id() const;
};

/// Binary hole grid, row-major, 1 = hole.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> grid;
  std::string spec_id;
  std::uint64_t seed = 0;

  Mask() = default;
  Mask(int h, int w) : height(h), width(w), grid(static_cast<std::size_t>(h) * w, 0) {}

  std::uint8_t at(int row, int col) const { return grid[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t& at(int row, int col) { return grid[static_cast<std::size_t>(row) * width + col]; }
  std::size_t hole_count() const;
  double hole_fraction() const;
  std::uint64_t fingerprint() const;

  bool operator==(const Mask&) const = default;
};

Mask generate_center_rect_mask(int resolution, double fraction);
Mask generate_freeform_mask(int resolution, const MaskSpec& spec, std::uint64_t seed);

/// Continuous image coordinates: pixel (row r, col c) covers
/// [c, c+1) × [r, r+1); its centre is (c + 0.5, r + 0.5).
struct Point {
  double x = 0;
  double y = 0;
};

/// Marks every pixel whose centre lies within width/2 of segment ab
/// (a capsule: rectangle plus round caps). Returns the number of newly set pixels.
std::size_t rasterize_stroke(Mask& mask, Point a, Point b, double width);

/// Upper bound on the free-form hole fraction; strokes that would push the
/// mask beyond it are dropped.
inline constexpr double kMaxHoleFraction = 0.5;

}  // namespace pgi
