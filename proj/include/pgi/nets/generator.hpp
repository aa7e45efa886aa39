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
#include <memory>
#include <span>

#include "pgi/mask_engine/mask.hpp"
#include "pgi/nets/layers.hpp"

namespace pgi {

struct GeneratorConfig {
  ModelFamily family = ModelFamily::custom;
  int base_filters = 16;
  int resolution = 64;
  int input_channels = 4;
  int output_channels = 3;

  void validate() const;
};

template <typename T>
struct GeneratorOutput {
  ag::Var<T> output;      // N×3×H×W in [-1, 1]
  ag::Var<T> coarse;      // first-stage output (free-form family only)
  Shape bottleneck_shape;  // deepest feature map
};

/// Common surface of the three generator families. Inputs are the masked
/// image (N×3×H×W, holes already zeroed) and the mask (N×1×H×W, 1 = hole).
template <typename T>
class Generator {
 public:
  explicit Generator(GeneratorConfig config) : config_(config) {}
  virtual ~Generator() = default;
  Generator(const Generator&) = delete;
  Generator& operator=(const Generator&) = delete;

  virtual GeneratorOutput<T> forward(const ag::Var<T>& masked_image, const ag::Var<T>& mask) const = 0;

  const GeneratorConfig& config() const noexcept { return config_; }
  ParamStore<T>& params() noexcept { return params_; }
  const ParamStore<T>& params() const noexcept { return params_; }

 protected:
  void check_inputs(const ag::Var<T>& masked_image, const ag::Var<T>& mask) const;
  GeneratorConfig config_;
  ParamStore<T> params_;
};

/// Builds and initializes a generator; `init_key` drives the weight init stream.
template <typename T>
std::unique_ptr<Generator<T>> make_generator(const GeneratorConfig& config, std::uint64_t init_key);

/// N×1×H×W tensor from a batch of equally sized masks.
template <typename T>
Tensor<T> masks_to_tensor(std::span<const Mask> masks);

/// Broadcasts an N×1×H×W mask to N×C×H×W.
template <typename T>
Tensor<T> expand_mask(const Tensor<T>& mask, int channels);

/// Sets hole pixels of `images` to zero (the generator input convention).
template <typename T>
Tensor<T> apply_holes(const Tensor<T>& images, const Tensor<T>& mask);

/// mask ⊙ raw + (1 − mask) ⊙ original. `mask` may have one channel or match
/// `raw`. Valid pixels are copied from `original` bit-for-bit.
template <typename T>
ag::Var<T> compose_output(const ag::Var<T>& raw, const ag::Var<T>& original, const Tensor<T>& mask);

}  // namespace pgi
