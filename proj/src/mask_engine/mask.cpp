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

#include "pgi/mask_engine/mask.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "pgi/common/error.hpp"
#include "pgi/common/rng.hpp"

namespace pgi {

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::custom: return "custom";
    case ModelFamily::context_encoder: return "ce";
    case ModelFamily::free_form: return "gated";
  }
  return "unknown";
}

ModelFamily parse_model_family(const std::string& name) {
  if (name == "custom") return ModelFamily::custom;
  if (name == "ce" || name == "context_encoder") return ModelFamily::context_encoder;
  if (name == "gated" || name == "free_form") return ModelFamily::free_form;
  throw ParameterError("unknown model family '" + name + "' (expected custom, ce or gated)");
}

namespace {

void check_fraction(double fraction) {
  if (!(fraction >= 0.0 && fraction <= 0.5))
    throw ParameterError("mask size fraction must lie in [0, 0.5], got " + std::to_string(fraction));
}

void check_resolution(int resolution) {
  if (resolution <= 0 || resolution % 2 != 0)
    throw ParameterError("mask resolution must be a positive even number, got " + std::to_string(resolution));
}

}  // namespace

MaskSpec MaskSpec::center_rect(double fraction) {
  check_fraction(fraction);
  MaskSpec s;
  s.kind = MaskKind::center_rect;
  s.size_fraction = fraction;
  return s;
}

MaskSpec MaskSpec::free_form_for_fraction(double fraction, int resolution, int max_turns) {
  check_fraction(fraction);
  MaskSpec s;
  s.kind = MaskKind::free_form;
  s.size_fraction = fraction;
  if (fraction == 0.0) return s;
  s.max_stroke_width = std::max(1, static_cast<int>(std::floor(fraction * resolution / 2.0 + 0.5)));
  s.stroke_count = std::max(1, static_cast<int>(std::floor(fraction * 8.0 + 0.5)));
  s.max_orientation_turns = max_turns;
  return s;
}

void MaskSpec::validate() const {
  check_fraction(size_fraction);
  if (kind == MaskKind::center_rect) {
    if (stroke_count != 0 || max_stroke_width != 0 || max_orientation_turns != 0)
      throw ParameterError("center_rect mask spec must not carry stroke parameters");
    return;
  }
  if (stroke_count < 0 || max_orientation_turns < 0 || max_stroke_width < 0)
    throw ParameterError("free-form stroke parameters must be non-negative");
  if (stroke_count == 0 && size_fraction > 0.0)
    throw ParameterError("free-form spec with a positive size fraction needs at least one stroke");
  if (stroke_count > 0 && max_stroke_width < 1)
    throw ParameterError("free-form strokes need max_stroke_width >= 1");
}

std::string MaskSpec::id() const {
  char buf[128];
  if (kind == MaskKind::center_rect) {
    std::snprintf(buf, sizeof buf, "center_rect/f=%.6f", size_fraction);
  } else {
    std::snprintf(buf, sizeof buf, "free_form/f=%.6f/n=%d/w=%d/t=%d", size_fraction, stroke_count,
                  max_stroke_width, max_orientation_turns);
  }
  return buf;
}

std::size_t Mask::hole_count() const {
  return static_cast<std::size_t>(std::count(grid.begin(), grid.end(), std::uint8_t{1}));
}

double Mask::hole_fraction() const {
  return grid.empty() ? 0.0 : static_cast<double>(hole_count()) / static_cast<double>(grid.size());
}

std::uint64_t Mask::fingerprint() const {
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(height), static_cast<std::uint32_t>(width)};
  auto h = fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(dims), sizeof dims));
  return fnv1a64(grid, h);
}

Mask generate_center_rect_mask(int resolution, double fraction) {
  check_fraction(fraction);
  check_resolution(resolution);
  Mask m(resolution, resolution);
  m.spec_id = MaskSpec::center_rect(fraction).id();
  const int side = static_cast<int>(std::floor(fraction * resolution + 0.5));
  const int top = (resolution - side) / 2;
  for (int r = top; r < top + side; ++r)
    for (int c = top; c < top + side; ++c) m.at(r, c) = 1;
  return m;
}

std::size_t rasterize_stroke(Mask& mask, Point a, Point b, double width) {
  const double r = width / 2.0;
  const double r2 = r * r;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  const int c0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - r)));
  const int c1 = std::min(mask.width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + r)));
  const int r0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - r)));
  const int r1 = std::min(mask.height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + r)));
  std::size_t added = 0;
  for (int row = r0; row <= r1; ++row)
    for (int col = c0; col <= c1; ++col) {
      const double px = col + 0.5, py = row + 0.5;
      double t = len2 > 0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double ex = px - (a.x + t * dx), ey = py - (a.y + t * dy);
      if (ex * ex + ey * ey <= r2 && mask.at(row, col) == 0) {
        mask.at(row, col) = 1;
        ++added;
      }
    }
  return added;
}

Mask generate_freeform_mask(int resolution, const MaskSpec& spec, std::uint64_t seed) {
  if (spec.kind != MaskKind::free_form) throw ParameterError("generate_freeform_mask needs a free_form spec");
  spec.validate();
  check_resolution(resolution);
  Mask m(resolution, resolution);
  m.spec_id = spec.id();
  m.seed = seed;
  if (spec.stroke_count == 0) return m;

  Rng rng(seed);
  const auto limit = static_cast<std::size_t>(kMaxHoleFraction * resolution * resolution);
  const double res = resolution;
  std::size_t holes = 0;
  for (int s = 0; s < spec.stroke_count; ++s) {
    Point p{rng.uniform(0.0, res), rng.uniform(0.0, res)};
    const int segments = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.max_orientation_turns) + 1));
    const double width = static_cast<double>(rng.between(std::max(1, (spec.max_stroke_width + 1) / 2), spec.max_stroke_width));
    double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int seg = 0; seg < segments; ++seg) {
      if (seg > 0) angle += rng.uniform(-0.75 * std::numbers::pi, 0.75 * std::numbers::pi);
      const double length = rng.uniform(res / 8.0, res / 4.0);
      Point q{std::clamp(p.x + length * std::cos(angle), 0.0, res), std::clamp(p.y + length * std::sin(angle), 0.0, res)};
      Mask trial = m;
      const std::size_t added = rasterize_stroke(trial, p, q, width);
      if (holes + added > limit) return m;
      holes += added;
      m.grid = std::move(trial.grid);
      p = q;
    }
  }
  return m;
}

}  // namespace pgi
