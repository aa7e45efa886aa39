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
#include <vector>

#include "pgi/mask_engine/mask.hpp"
#include "pgi/nets/layers.hpp"

namespace pgi {

struct DiscriminatorConfig {
  ModelFamily family = ModelFamily::custom;
  int base_filters = 16;
  int num_layers = 5;   // custom family
  int patch_size = 70;  // free-form family receptive field
  int resolution = 64;
  int input_channels = 3;

  void validate() const;
};

template <typename T>
struct DiscriminatorOutput {
  /// Real/fake score maps. Custom: one per tapped depth; free-form: one
  /// patch map; context encoder: one N×1×1×1 scalar score.
  std::vector<ag::Var<T>> scores;
  /// Activations after every conv layer, shallow to deep.
  std::vector<ag::Var<T>> features;
  /// Downsampling factor of each score map relative to the input.
  std::vector<int> score_scales;
};

template <typename T>
class Discriminator {
 public:
  explicit Discriminator(DiscriminatorConfig config) : config_(config) {}
  virtual ~Discriminator() = default;
  Discriminator(const Discriminator&) = delete;
  Discriminator& operator=(const Discriminator&) = delete;

  virtual DiscriminatorOutput<T> forward(const ag::Var<T>& image) const = 0;
  /// Receptive field (pixels) of one element of the last score map.
  virtual int receptive_field() const = 0;

  const DiscriminatorConfig& config() const noexcept { return config_; }
  ParamStore<T>& params() noexcept { return params_; }
  const ParamStore<T>& params() const noexcept { return params_; }

 protected:
  void check_input(const ag::Var<T>& image) const;
  DiscriminatorConfig config_;
  ParamStore<T> params_;
};

template <typename T>
std::unique_ptr<Discriminator<T>> make_discriminator(const DiscriminatorConfig& config, std::uint64_t init_key);

/// Receptive field of a chain of convolutions (kernel, stride, dilation).
struct ConvGeometry {
  int kernel;
  int stride;
  int dilation = 1;
};
int receptive_field(const std::vector<ConvGeometry>& layers);

}  // namespace pgi
