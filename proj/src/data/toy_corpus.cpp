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

#include "pgi/data/toy_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pgi/common/error.hpp"
#include "pgi/common/rng.hpp"

namespace pgi {

const std::vector<std::string>& toy_class_names() {
  static const std::vector<std::string> names{"disc", "square", "stripes", "gradient"};
  return names;
}

namespace {

struct Rgb {
  double r, g, b;
};

Rgb random_color(Rng& rng) { return {rng.uniform(20, 235), rng.uniform(20, 235), rng.uniform(20, 235)}; }

void put(RgbImage& img, int y, int x, const Rgb& c) {
  std::uint8_t* p = img.at(y, x);
  p[0] = static_cast<std::uint8_t>(std::clamp(std::lround(c.r), 0L, 255L));
  p[1] = static_cast<std::uint8_t>(std::clamp(std::lround(c.g), 0L, 255L));
  p[2] = static_cast<std::uint8_t>(std::clamp(std::lround(c.b), 0L, 255L));
}

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

}  // namespace

RgbImage render_toy_image(int label, int resolution, std::uint64_t key) {
  if (label < 0 || label >= static_cast<int>(toy_class_names().size()))
    throw ParameterError("toy label out of range: " + std::to_string(label));
  if (resolution < 8) throw ParameterError("toy resolution must be >= 8");
  Rng rng(key);
  const double R = resolution;
  const Rgb bg = random_color(rng), fg = random_color(rng);
  RgbImage img(resolution, resolution);

  switch (label) {
    case 0: {  // filled disc on a vertical background ramp
      const double cx = rng.uniform(0.3, 0.7) * R, cy = rng.uniform(0.3, 0.7) * R;
      const double rad = rng.uniform(0.15, 0.3) * R;
      const Rgb bg2 = random_color(rng);
      for (int y = 0; y < resolution; ++y)
        for (int x = 0; x < resolution; ++x) {
          const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
          put(img, y, x, d <= rad ? fg : lerp(bg, bg2, (y + 0.5) / R));
        }
      break;
    }
    case 1: {  // rotated square
      const double cx = rng.uniform(0.35, 0.65) * R, cy = rng.uniform(0.35, 0.65) * R;
      const double half = rng.uniform(0.15, 0.28) * R;
      const double th = rng.uniform(0, std::numbers::pi / 2);
      const double c = std::cos(th), s = std::sin(th);
      for (int y = 0; y < resolution; ++y)
        for (int x = 0; x < resolution; ++x) {
          const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
          const double u = c * dx + s * dy, v = -s * dx + c * dy;
          put(img, y, x, std::max(std::abs(u), std::abs(v)) <= half ? fg : bg);
        }
      break;
    }
    case 2: {  // oriented sinusoidal stripes
      const double th = rng.uniform(0, std::numbers::pi);
      const double period = rng.uniform(0.12, 0.3) * R;
      const double phase = rng.uniform(0, 2 * std::numbers::pi);
      const double c = std::cos(th), s = std::sin(th);
      for (int y = 0; y < resolution; ++y)
        for (int x = 0; x < resolution; ++x) {
          const double t = 0.5 + 0.5 * std::sin(2 * std::numbers::pi * (c * x + s * y) / period + phase);
          put(img, y, x, lerp(bg, fg, t));
        }
      break;
    }
    default: {  // smooth two-colour radial gradient
      const double cx = rng.uniform(0, 1) * R, cy = rng.uniform(0, 1) * R;
      for (int y = 0; y < resolution; ++y)
        for (int x = 0; x < resolution; ++x) {
          const double t = std::min(1.0, std::hypot(x + 0.5 - cx, y + 0.5 - cy) / (1.2 * R));
          put(img, y, x, lerp(fg, bg, t));
        }
      break;
    }
  }
  return img;
}

void generate_toy_corpus(const std::filesystem::path& dir, const ToyCorpusSpec& spec) {
  if (spec.train_count < 0 || spec.test_count < 0) throw ParameterError("toy corpus counts must be non-negative");
  const auto& names = toy_class_names();
  const int classes = static_cast<int>(names.size());
  auto emit = [&](const char* split, int count, std::uint64_t split_tag) {
    for (int i = 0; i < count; ++i) {
      const int label = i % classes;
      char file[32];
      std::snprintf(file, sizeof file, "%05d.png", i);
      const auto key = derive_key(spec.seed, {stream::kCorpus, split_tag, static_cast<std::uint64_t>(i)});
      write_png(render_toy_image(label, spec.resolution, key), dir / split / names[static_cast<std::size_t>(label)] / file);
    }
  };
  emit("train", spec.train_count, 0);
  emit("test", spec.test_count, 1);
}

}  // namespace pgi
