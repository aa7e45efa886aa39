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

#include "pgi/nets/discriminator.hpp"

#include <algorithm>

namespace pgi {

void DiscriminatorConfig::validate() const {
  if (base_filters < 1) throw ConfigurationError("discriminator base_filters must be positive");
  if (input_channels != 3) throw ConfigurationError("discriminator consumes RGB images");
  switch (family) {
    case ModelFamily::custom:
      if (num_layers != 5) throw ConfigurationError("custom discriminator has exactly 5 conv layers");
      if (resolution < 1) throw ConfigurationError("discriminator resolution must be positive");
      break;
    case ModelFamily::free_form:
      if (patch_size != 70) throw ConfigurationError("free-form discriminator is the 70×70 PatchGAN; patch_size must be 70");
      if (resolution < 32) throw ConfigurationError("70×70 PatchGAN needs resolution >= 32");
      break;
    case ModelFamily::context_encoder:
      if (resolution < 8) throw ConfigurationError("context-encoder discriminator needs resolution >= 8");
      break;
  }
}

template <typename T>
void Discriminator<T>::check_input(const ag::Var<T>& image) const {
  const Shape& s = image.shape();
  if (s.size() != 4 || s[1] != config_.input_channels || s[2] != config_.resolution || s[3] != config_.resolution)
    throw ConfigurationError("discriminator expects N×3×" + std::to_string(config_.resolution) + "×" +
                             std::to_string(config_.resolution) + " input, got " + to_string(s));
}

int receptive_field(const std::vector<ConvGeometry>& layers) {
  int rf = 1;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it)
    rf = (rf - 1) * it->stride + it->dilation * (it->kernel - 1) + 1;
  return rf;
}

namespace {

using ag::Var;

// Five stride-2 convs, filters f, 2f, 4f, 8f, 8f. Score heads read the
// last three depths.
template <typename T>
class MultiScaleDiscriminator final : public Discriminator<T> {
 public:
  static constexpr int kFirstTap = 2;

  MultiScaleDiscriminator(const DiscriminatorConfig& cfg, Rng& rng) : Discriminator<T>(cfg) {
    auto& p = this->params_;
    int in = cfg.input_channels;
    for (int i = 0; i < cfg.num_layers; ++i) {
      const int out = cfg.base_filters << std::min(i, 3);
      const std::string n = "layer" + std::to_string(i);
      convs_.emplace_back(p, n, in, out, 3, ag::Conv2dOptions{2, 1, 1}, rng);
      if (i > 0) norms_.emplace_back(p, n + ".norm", out);
      if (i >= kFirstTap) heads_.emplace_back(p, "head" + std::to_string(i), out, 1, 3, ag::Conv2dOptions{1, 1, 1}, rng);
      in = out;
    }
  }

  DiscriminatorOutput<T> forward(const Var<T>& image) const override {
    this->check_input(image);
    DiscriminatorOutput<T> out;
    Var<T> x = image;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      x = convs_[i](x);
      if (i > 0) x = norms_[i - 1](x);
      x = ag::leaky_relu(x, T(0.2));
      out.features.push_back(x);
      if (static_cast<int>(i) >= kFirstTap) {
        out.scores.push_back(heads_[i - kFirstTap](x));
        out.score_scales.push_back(2 << i);
      }
    }
    return out;
  }

  int receptive_field() const override {
    std::vector<ConvGeometry> g(convs_.size(), ConvGeometry{3, 2, 1});
    g.push_back({3, 1, 1});
    return pgi::receptive_field(g);
  }

 private:
  std::vector<Conv2d<T>> convs_;
  std::vector<InstanceNorm<T>> norms_;
  std::vector<Conv2d<T>> heads_;
};

// pix2pix-style PatchGAN: C64-C128-C256 (stride 2), C512 (stride 1), then a
// 1-channel stride-1 conv; all 4×4 kernels give a 70×70 receptive field.
template <typename T>
class PatchDiscriminator final : public Discriminator<T> {
 public:
  PatchDiscriminator(const DiscriminatorConfig& cfg, Rng& rng) : Discriminator<T>(cfg) {
    auto& p = this->params_;
    const int f = cfg.base_filters;
    const int widths[] = {f, 2 * f, 4 * f, 8 * f};
    const int strides[] = {2, 2, 2, 1};
    int in = cfg.input_channels;
    for (int i = 0; i < 4; ++i) {
      convs_.emplace_back(p, "layer" + std::to_string(i), in, widths[i], 4, ag::Conv2dOptions{strides[i], 1, 1}, rng);
      in = widths[i];
    }
    head_ = {p, "head", in, 1, 4, ag::Conv2dOptions{1, 1, 1}, rng};
  }

  DiscriminatorOutput<T> forward(const Var<T>& image) const override {
    this->check_input(image);
    DiscriminatorOutput<T> out;
    Var<T> x = image;
    for (const auto& c : convs_) {
      x = ag::leaky_relu(c(x), T(0.2));
      out.features.push_back(x);
    }
    out.scores.push_back(head_(x));
    out.score_scales.push_back(8);
    return out;
  }

  int receptive_field() const override {
    return pgi::receptive_field({{4, 2}, {4, 2}, {4, 2}, {4, 1}, {4, 1}});
  }

 private:
  std::vector<Conv2d<T>> convs_;
  Conv2d<T> head_;
};

// Strided conv stack reduced to one real/fake logit per image.
template <typename T>
class GlobalDiscriminator final : public Discriminator<T> {
 public:
  GlobalDiscriminator(const DiscriminatorConfig& cfg, Rng& rng) : Discriminator<T>(cfg) {
    auto& p = this->params_;
    const int f = cfg.base_filters;
    int in = cfg.input_channels;
    for (int i = 0; i < 3; ++i) {
      const int out = f << i;
      convs_.emplace_back(p, "layer" + std::to_string(i), in, out, 3, ag::Conv2dOptions{2, 1, 1}, rng);
      if (i > 0) norms_.emplace_back(p, "layer" + std::to_string(i) + ".norm", out);
      in = out;
    }
    head_ = {p, "head", in, 1, 3, ag::Conv2dOptions{1, 1, 1}, rng};
  }

  DiscriminatorOutput<T> forward(const Var<T>& image) const override {
    this->check_input(image);
    DiscriminatorOutput<T> out;
    Var<T> x = image;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      x = convs_[i](x);
      if (i > 0) x = norms_[i - 1](x);
      x = ag::leaky_relu(x, T(0.2));
      out.features.push_back(x);
    }
    out.scores.push_back(ag::global_avg_pool(head_(x)));
    out.score_scales.push_back(this->config_.resolution);
    return out;
  }

  int receptive_field() const override {
    return pgi::receptive_field({{3, 2}, {3, 2}, {3, 2}, {3, 1}});
  }

 private:
  std::vector<Conv2d<T>> convs_;
  std::vector<InstanceNorm<T>> norms_;
  Conv2d<T> head_;
};

}  // namespace

template <typename T>
std::unique_ptr<Discriminator<T>> make_discriminator(const DiscriminatorConfig& config, std::uint64_t init_key) {
  config.validate();
  Rng rng(init_key);
  switch (config.family) {
    case ModelFamily::custom: return std::make_unique<MultiScaleDiscriminator<T>>(config, rng);
    case ModelFamily::free_form: return std::make_unique<PatchDiscriminator<T>>(config, rng);
    case ModelFamily::context_encoder: return std::make_unique<GlobalDiscriminator<T>>(config, rng);
  }
  throw ConfigurationError("unknown discriminator family");
}

template class Discriminator<float>;
template class Discriminator<double>;
template std::unique_ptr<Discriminator<float>> make_discriminator(const DiscriminatorConfig&, std::uint64_t);
template std::unique_ptr<Discriminator<double>> make_discriminator(const DiscriminatorConfig&, std::uint64_t);

}  // namespace pgi
