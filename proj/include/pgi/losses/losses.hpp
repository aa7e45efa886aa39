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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pgi/mask_engine/schedule.hpp"
#include "pgi/tensor/autograd.hpp"

namespace pgi {

/// Training setups: (a) fixed masks, constant weights; (b) growing masks;
/// (c) reconstruction only for the first half; (d) adversarial weight ramp.
enum class TrainingSetup { a, b, c, d };

std::string to_string(TrainingSetup setup);
TrainingSetup parse_setup(const std::string& name);

struct LossWeights {
  double w_valid_l1 = 1.0;
  double w_hole_l1 = 6.0;
  double w_perceptual = 0.1;
  double w_adversarial = 1.0;

  /// Family defaults. Custom: 1 / 6 / 0.1 / 1. Context encoder: the hole
  /// term is a pixel-wise L2 at 0.999 with adversarial 0.001. Free-form:
  /// L1 1 / 1, no perceptual term, adversarial 1.
  static LossWeights preset(ModelFamily family);
  void validate() const;
};

struct LossTerm {
  std::string name;
  double weight = 0;
  double value = 0;
};

struct LossBreakdown {
  std::vector<LossTerm> terms;
  double total = 0;
  double discriminator = 0;

  double term(const std::string& name) const;
  /// Σ weight × value, recomputed from the stored terms.
  double weighted_sum() const;
};

enum class Region { hole, valid };

template <typename T>
ag::Var<T> lsgan_d_loss(std::span<const ag::Var<T>> real_scores, std::span<const ag::Var<T>> fake_scores);
template <typename T>
ag::Var<T> lsgan_g_loss(std::span<const ag::Var<T>> fake_scores);
template <typename T>
ag::Var<T> hinge_d_loss(std::span<const ag::Var<T>> real_scores, std::span<const ag::Var<T>> fake_scores);
template <typename T>
ag::Var<T> hinge_g_loss(std::span<const ag::Var<T>> fake_scores);
/// Non-saturating cross-entropy GAN loss on logits (context-encoder family).
template <typename T>
ag::Var<T> bce_d_loss(std::span<const ag::Var<T>> real_scores, std::span<const ag::Var<T>> fake_scores);
template <typename T>
ag::Var<T> bce_g_loss(std::span<const ag::Var<T>> fake_scores);

/// Mean |gt − pred| over the pixels of `region`, averaged over channels.
/// `mask` is N×1×H×W or matches the images. An empty region yields 0.
template <typename T>
ag::Var<T> region_l1(const ag::Var<T>& ground_truth, const ag::Var<T>& prediction, const Tensor<T>& mask,
                     Region region);
/// Squared-error counterpart of region_l1.
template <typename T>
ag::Var<T> region_l2(const ag::Var<T>& ground_truth, const ag::Var<T>& prediction, const Tensor<T>& mask,
                     Region region);

/// Pluggable perceptual feature network. Images arrive in [-1, 1].
template <typename T>
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::vector<ag::Var<T>> extract(const ag::Var<T>& images) const = 0;
  virtual std::string name() const = 0;
};

template <typename T>
class IdentityExtractor final : public FeatureExtractor<T> {
 public:
  std::vector<ag::Var<T>> extract(const ag::Var<T>& images) const override { return {images}; }
  std::string name() const override { return "identity"; }
};

template <typename T>
struct FixedConvLayer {
  Tensor<T> weight;  // O×C×k×k
  Tensor<T> bias;    // O
  ag::Conv2dOptions options;
  bool relu = true;
};

/// Chain of frozen convolutions; every layer's output is a feature level.
template <typename T>
class FixedConvExtractor : public FeatureExtractor<T> {
 public:
  explicit FixedConvExtractor(std::vector<FixedConvLayer<T>> layers, std::string name = "fixed_conv");
  std::vector<ag::Var<T>> extract(const ag::Var<T>& images) const override;
  std::string name() const override { return name_; }
  const std::vector<FixedConvLayer<T>>& layers() const noexcept { return layers_; }

 private:
  std::vector<FixedConvLayer<T>> layers_;
  std::string name_;
};

/// Desk-profile extractor: two frozen random convs (3→8 stride 1, 8→16
/// stride 2), He-initialized from `seed`.
template <typename T>
std::unique_ptr<FeatureExtractor<T>> make_random_conv_extractor(std::uint64_t seed);

/// Full-profile extractor: frozen conv stack read from a parameter archive
/// (tensors "layer<i>.w"/"layer<i>.b", manifest "strides"/"paddings").
/// Throws ConfigurationError when the file is unavailable.
template <typename T>
std::unique_ptr<FeatureExtractor<T>> load_conv_extractor(const std::filesystem::path& path);

/// Σ over feature levels of mean |φ(gt) − φ(pred)|.
template <typename T>
ag::Var<T> perceptual_loss(const ag::Var<T>& ground_truth, const ag::Var<T>& prediction,
                           const FeatureExtractor<T>* extractor);

/// Adversarial weight in effect at `iteration` under `setup`:
/// a, b → base; c → 0 before total/2, base afterwards; d → base·(stage+1)/num_stages
/// (or the schedule's explicit per-stage table when present).
double adversarial_weight_for_iteration(TrainingSetup setup, const CurriculumSchedule& schedule, long long iteration,
                                        double base_weight);

}  // namespace pgi
