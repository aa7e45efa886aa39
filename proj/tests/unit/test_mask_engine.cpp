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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pgi/common/error.hpp"
#include "pgi/mask_engine/mask_io.hpp"
#include "pgi/mask_engine/schedule.hpp"
#include "support.hpp"

namespace pgi {
namespace {

// Capsule coverage written as "rotated rectangle ∪ two end discs", which
// is a different decomposition from the projection used by the rasterizer.
std::size_t capsule_oracle(int res, Point a, Point b, double width) {
  const double r = width / 2, dx = b.x - a.x, dy = b.y - a.y, len = std::hypot(dx, dy);
  std::size_t n = 0;
  for (int row = 0; row < res; ++row)
    for (int col = 0; col < res; ++col) {
      const double px = col + 0.5, py = row + 0.5;
      bool in = std::hypot(px - a.x, py - a.y) <= r || std::hypot(px - b.x, py - b.y) <= r;
      if (!in && len > 0) {
        const double along = ((px - a.x) * dx + (py - a.y) * dy) / len;
        const double across = std::abs((px - a.x) * dy - (py - a.y) * dx) / len;
        in = along >= 0 && along <= len && across <= r;
      }
      n += in;
    }
  return n;
}

std::size_t count_holes(const Mask& m) {
  std::size_t n = 0;
  for (int r = 0; r < m.height; ++r)
    for (int c = 0; c < m.width; ++c) n += m.at(r, c);
  return n;
}

TEST(CenterRect, HalfOf128IsCentered64Square) {
  const Mask m = generate_center_rect_mask(128, 0.5);
  EXPECT_EQ(count_holes(m), 4096u);
  EXPECT_EQ(m.at(32, 32), 1);
  EXPECT_EQ(m.at(95, 95), 1);
  EXPECT_EQ(m.at(31, 64), 0);
  EXPECT_EQ(m.at(96, 64), 0);
}

TEST(CenterRect, ZeroFractionIsEmpty) { EXPECT_EQ(count_holes(generate_center_rect_mask(128, 0.0)), 0u); }

TEST(CenterRect, QuarterOf64BruteForce) {
  const Mask m = generate_center_rect_mask(64, 0.25);
  std::size_t holes = 0;
  int rmin = 64, rmax = -1, cmin = 64, cmax = -1;
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c)
      if (m.at(r, c)) {
        ++holes;
        rmin = std::min(rmin, r), rmax = std::max(rmax, r), cmin = std::min(cmin, c), cmax = std::max(cmax, c);
      }
  EXPECT_EQ(holes, 256u);
  EXPECT_EQ(rmin, 24);
  EXPECT_EQ(rmax, 39);
  EXPECT_EQ(cmin, 24);
  EXPECT_EQ(cmax, 39);
}

TEST(CenterRect, RejectsBadArguments) {
  EXPECT_THROW(generate_center_rect_mask(64, 0.6), ParameterError);
  EXPECT_THROW(generate_center_rect_mask(64, -0.1), ParameterError);
  EXPECT_THROW(generate_center_rect_mask(63, 0.2), ParameterError);
}

TEST(CenterRect, MonotoneAcrossStagesAndBounded) {
  const auto s = CurriculumSchedule::growing(1000, 100);
  std::size_t prev = 0;
  for (int st = 0; st < s.num_stages; ++st) {
    for (int res : {32, 64, 128}) {
      const Mask m = generate_center_rect_mask(res, mask_fraction_for_stage(s, st));
      const double bound = (0.5 * res + 1) * (0.5 * res + 1);
      EXPECT_LE(static_cast<double>(m.hole_count()), bound);
    }
    const std::size_t n = generate_center_rect_mask(128, mask_fraction_for_stage(s, st)).hole_count();
    EXPECT_GE(n, prev);
    prev = n;
  }
}

TEST(FreeForm, DegenerateSpecIsEmpty) {
  MaskSpec spec;
  spec.kind = MaskKind::free_form;
  const Mask m = generate_freeform_mask(64, spec, 3);
  EXPECT_EQ(m.hole_count(), 0u);
  EXPECT_EQ(generate_freeform_mask(64, MaskSpec::free_form_for_fraction(0.0, 64), 3).hole_count(), 0u);
}

TEST(FreeForm, ZeroStrokesWithPositiveFractionRejected) {
  MaskSpec spec;
  spec.kind = MaskKind::free_form;
  spec.size_fraction = 0.2;
  spec.max_stroke_width = 4;
  EXPECT_THROW(generate_freeform_mask(64, spec, 1), ParameterError);
}

TEST(FreeForm, DeterministicPerSeed) {
  const MaskSpec spec = MaskSpec::free_form_for_fraction(0.3, 64);
  const Mask a = generate_freeform_mask(64, spec, 42), b = generate_freeform_mask(64, spec, 42);
  EXPECT_EQ(a.grid, b.grid);
  EXPECT_NE(a.grid, generate_freeform_mask(64, spec, 43).grid);
}

TEST(FreeForm, SpecMappingScalesWidthAndCount) {
  const MaskSpec s = MaskSpec::free_form_for_fraction(0.5, 128);
  EXPECT_EQ(s.max_stroke_width, 32);
  EXPECT_EQ(s.stroke_count, 4);
  const MaskSpec t = MaskSpec::free_form_for_fraction(0.1, 64);
  EXPECT_EQ(t.max_stroke_width, 3);
  EXPECT_EQ(t.stroke_count, 1);
}

TEST(FreeForm, HoleFractionBoundedAndNonEmpty) {
  for (double f : {0.05, 0.1, 0.25, 0.4, 0.5})
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const Mask m = generate_freeform_mask(64, MaskSpec::free_form_for_fraction(f, 64), seed);
      EXPECT_LE(m.hole_fraction(), kMaxHoleFraction);
      EXPECT_GT(m.hole_count(), 0u) << "f=" << f << " seed=" << seed;
      for (auto v : m.grid) ASSERT_LE(v, 1);
    }
}

TEST(Stroke, HorizontalWidth4Length32GoldenCount) {
  Mask m(64, 64);
  const std::size_t n = rasterize_stroke(m, {16, 32}, {48, 32}, 4);
  EXPECT_EQ(n, capsule_oracle(64, {16, 32}, {48, 32}, 4));
  EXPECT_EQ(n, 140u);
  EXPECT_GE(n, 120u);
  EXPECT_LE(n, 140u);
}

TEST(Stroke, MatchesOracleForObliqueSegments) {
  const Point pts[][2] = {{{5.2, 7.9}, {40.1, 30.3}}, {{50, 10}, {12.5, 44}}, {{20, 20}, {20, 20}}};
  for (double w : {1.0, 3.0, 6.5})
    for (const auto& seg : pts) {
      Mask m(64, 64);
      EXPECT_EQ(rasterize_stroke(m, seg[0], seg[1], w), capsule_oracle(64, seg[0], seg[1], w));
    }
}

TEST(Schedule, StageBoundaries) {
  const auto s = CurriculumSchedule::growing(1000000, 100000);
  EXPECT_EQ(s.num_stages, 10);
  EXPECT_EQ(stage_for_iteration(s, 0), 0);
  EXPECT_EQ(stage_for_iteration(s, 99999), 0);
  EXPECT_EQ(stage_for_iteration(s, 100000), 1);
  EXPECT_EQ(stage_for_iteration(s, 999999), 9);
  EXPECT_THROW(stage_for_iteration(s, 1000000), ParameterError);
  EXPECT_THROW(stage_for_iteration(s, -1), ParameterError);
}

TEST(Schedule, StepFunctionHasExactlyNumStagesValues) {
  const auto s = CurriculumSchedule::growing(120, 12);
  std::set<int> seen;
  for (long long i = 0; i < 120; ++i) {
    seen.insert(stage_for_iteration(s, i));
    EXPECT_EQ(stage_for_iteration(s, i), i / 12);
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(Schedule, FractionInterpolation) {
  const auto s = CurriculumSchedule::growing(1000000, 100000, 0.1);
  EXPECT_EQ(mask_fraction_for_stage(s, 9), 0.5);
  EXPECT_DOUBLE_EQ(mask_fraction_for_stage(s, 0), 0.1);
  EXPECT_NEAR(mask_fraction_for_stage(s, 4), 0.1 + (4.0 / 9.0) * 0.4, 1e-15);
  EXPECT_NEAR(mask_fraction_for_stage(s, 4), 0.2778, 1e-4);
  for (int i = 1; i < 10; ++i) EXPECT_GE(mask_fraction_for_stage(s, i), mask_fraction_for_stage(s, i - 1));
  EXPECT_THROW(mask_fraction_for_stage(s, 10), ParameterError);
}

TEST(Schedule, FixedScheduleIsConstant) {
  const auto s = CurriculumSchedule::fixed(2000, 200, 0.5);
  for (int i = 0; i < s.num_stages; ++i) EXPECT_EQ(mask_fraction_for_stage(s, i), 0.5);
  EXPECT_EQ(s.total_iterations(), 2000);
}

TEST(Batch, ContextEncoderLastStageGivesIdenticalCenterMasks) {
  const auto s = CurriculumSchedule::growing(1000, 100);
  const auto masks = masks_for_batch(s, 999, 4, 128, ModelFamily::context_encoder, 5);
  ASSERT_EQ(masks.size(), 4u);
  for (const auto& m : masks) {
    EXPECT_EQ(m.grid, masks[0].grid);
    EXPECT_EQ(m.hole_count(), 4096u);
  }
}

TEST(Batch, EmptyAndDeterministic) {
  const auto s = CurriculumSchedule::growing(1000, 100);
  EXPECT_TRUE(masks_for_batch(s, 10, 0, 64, ModelFamily::custom, 1).empty());
  const auto a = masks_for_batch(s, 350, 4, 64, ModelFamily::custom, 1);
  const auto b = masks_for_batch(s, 350, 4, 64, ModelFamily::custom, 1);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].grid, b[i].grid);
  EXPECT_NE(a[0].grid, a[1].grid);
}

TEST(MaskIo, RleExampleAndRoundTrip) {
  Mask m(2, 2);
  m.grid = {0, 1, 1, 0};
  EXPECT_EQ(encode_mask_rle(m), "2 2; 1 2 1");
  Mask h(1, 3);
  h.grid = {1, 1, 0};
  EXPECT_EQ(encode_mask_rle(h), "1 3; 0 2 1");
  const Mask f = generate_freeform_mask(64, MaskSpec::free_form_for_fraction(0.4, 64), 9);
  EXPECT_EQ(decode_mask_rle(encode_mask_rle(f)).grid, f.grid);
  EXPECT_THROW(decode_mask_rle("2 2 1 2 1"), ParameterError);
}

TEST(MaskIo, PngRoundTrip) {
  test::TempDir dir("maskpng");
  const Mask f = generate_freeform_mask(32, MaskSpec::free_form_for_fraction(0.3, 32), 2);
  write_mask_png(f, dir / "m.png");
  const Mask g = read_mask_png(dir / "m.png");
  EXPECT_EQ(g.height, 32);
  EXPECT_EQ(g.grid, f.grid);
}

}  // namespace
}  // namespace pgi
