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

#include "pgi/nets/generator.hpp"

#include <array>

namespace pgi {

void GeneratorConfig::validate() const {
  if (resolution <= 0 || resolution % 4 != 0)
    throw ConfigurationError("generator resolution must be a positive multiple of 4, got " +
                             std::to_string(resolution));
  if (base_filters < 8) throw ConfigurationError("generator base_filters must be >= 8");
  if (input_channels != 4 || output_channels != 3)
    throw ConfigurationError("generator takes RGB + mask (4 channels) and emits RGB (3 channels)");
  if (family == ModelFamily::free_form && resolution < 16)
    throw ConfigurationError("free-form generator needs resolution >= 16");
}

template <typename T>
void Generator<T>::check_inputs(const ag::Var<T>& masked_image, const ag::Var<T>& mask) const {
  const Shape& s = masked_image.shape();
  if (s.size() != 4 || s[1] != 3 || s[2] != config_.resolution || s[3] != config_.resolution)
    throw ConfigurationError("generator expects N×3×" + std::to_string(config_.resolution) + "×" +
                             std::to_string(config_.resolution) + " input, got " + to_string(s));
  const Shape& m = mask.shape();
  if (m.size() != 4 || m[0] != s[0] || m[1] != 1 || m[2] != s[2] || m[3] != s[3])
    throw ConfigurationError("generator mask shape " + to_string(m) + " does not match image " + to_string(s));
}

namespace {

using ag::Conv2dOptions;
using ag::Var;

constexpr Conv2dOptions same3{1, 1, 1};
constexpr Conv2dOptions down3{2, 1, 1};

template <typename T>
Var<T> upsample2(const Var<T>& x) {
  return ag::resize_bilinear(x, x.value().dim(2) * 2, x.value().dim(3) * 2);
}

template <typename T>
Var<T> stack_input(const Var<T>& masked_image, const Var<T>& mask) {
  const std::array parts{masked_image, mask};
  return ag::concat_channels<T>(parts);
}

// Gated stem, two stride-2 gated stages to 1/4 resolution, two residual
// blocks, then a mirrored decoder that upsamples bilinearly before each
// gated conv. Filters double at each downsampling stage.
template <typename T>
class CustomGenerator final : public Generator<T> {
 public:
  CustomGenerator(const GeneratorConfig& cfg, Rng& rng) : Generator<T>(cfg) {
    auto& p = this->params_;
    const int f = cfg.base_filters;
    stem_ = {p, "enc.stem", 4, f, 3, same3, Activation::elu, rng};
    stem_norm_ = {p, "enc.stem.norm", f};
    down1_ = {p, "enc.down1", f, 2 * f, 3, down3, Activation::elu, rng};
    down1_norm_ = {p, "enc.down1.norm", 2 * f};
    down2_ = {p, "enc.down2", 2 * f, 4 * f, 3, down3, Activation::elu, rng};
    down2_norm_ = {p, "enc.down2.norm", 4 * f};
    for (int b = 0; b < 2; ++b) {
      const std::string n = "res" + std::to_string(b);
      res_[b].conv1 = {p, n + ".conv1", 4 * f, 4 * f, 3, same3, Activation::elu, rng};
      res_[b].norm1 = {p, n + ".norm1", 4 * f};
      res_[b].conv2 = {p, n + ".conv2", 4 * f, 4 * f, 3, same3, Activation::identity, rng};
      res_[b].norm2 = {p, n + ".norm2", 4 * f};
    }
    up1_ = {p, "dec.up1", 4 * f, 2 * f, 3, same3, Activation::elu, rng};
    up1_norm_ = {p, "dec.up1.norm", 2 * f};
    up2_ = {p, "dec.up2", 2 * f, f, 3, same3, Activation::elu, rng};
    up2_norm_ = {p, "dec.up2.norm", f};
    out_ = {p, "dec.out", f, 3, 3, same3, rng};
  }

  GeneratorOutput<T> forward(const Var<T>& masked_image, const Var<T>& mask) const override {
    this->check_inputs(masked_image, mask);
    auto x = stem_norm_(stem_(stack_input(masked_image, mask)));
    x = down1_norm_(down1_(x));
    x = down2_norm_(down2_(x));
    for (const auto& b : res_) {
      auto h = b.norm1(b.conv1(x));
      h = b.norm2(b.conv2(h));
      x = ag::add(x, h);
    }
    GeneratorOutput<T> out;
    out.bottleneck_shape = x.shape();
    x = up1_norm_(up1_(upsample2(x)));
    x = up2_norm_(up2_(upsample2(x)));
    out.output = ag::tanh(out_(x));
    return out;
  }

 private:
  struct ResBlock {
    GatedConv2d<T> conv1, conv2;
    InstanceNorm<T> norm1, norm2;
  };
  GatedConv2d<T> stem_, down1_, down2_, up1_, up2_;
  InstanceNorm<T> stem_norm_, down1_norm_, down2_norm_, up1_norm_, up2_norm_;
  std::array<ResBlock, 2> res_;
  Conv2d<T> out_;
};

// Plain-convolution encoder/decoder in the spirit of the context encoder,
// sized to the configured resolution.
template <typename T>
class ContextEncoderGenerator final : public Generator<T> {
 public:
  ContextEncoderGenerator(const GeneratorConfig& cfg, Rng& rng) : Generator<T>(cfg) {
    auto& p = this->params_;
    const int f = cfg.base_filters;
    enc1_ = {p, "enc1", 4, f, 3, down3, rng};
    enc2_ = {p, "enc2", f, 2 * f, 3, down3, rng};
    enc2_norm_ = {p, "enc2.norm", 2 * f};
    bottleneck_ = {p, "bottleneck", 2 * f, 4 * f, 3, same3, rng};
    bottleneck_norm_ = {p, "bottleneck.norm", 4 * f};
    dec1_ = {p, "dec1", 4 * f, 2 * f, 3, same3, rng};
    dec1_norm_ = {p, "dec1.norm", 2 * f};
    dec2_ = {p, "dec2", 2 * f, f, 3, same3, rng};
    dec2_norm_ = {p, "dec2.norm", f};
    out_ = {p, "out", f, 3, 3, same3, rng};
  }

  GeneratorOutput<T> forward(const Var<T>& masked_image, const Var<T>& mask) const override {
    this->check_inputs(masked_image, mask);
    const T slope = T(0.2);
    auto x = ag::leaky_relu(enc1_(stack_input(masked_image, mask)), slope);
    x = ag::leaky_relu(enc2_norm_(enc2_(x)), slope);
    x = ag::leaky_relu(bottleneck_norm_(bottleneck_(x)), slope);
    GeneratorOutput<T> out;
    out.bottleneck_shape = x.shape();
    x = ag::relu(dec1_norm_(dec1_(upsample2(x))));
    x = ag::relu(dec2_norm_(dec2_(upsample2(x))));
    out.output = ag::tanh(out_(x));
    return out;
  }

 private:
  Conv2d<T> enc1_, enc2_, bottleneck_, dec1_, dec2_, out_;
  InstanceNorm<T> enc2_norm_, bottleneck_norm_, dec1_norm_, dec2_norm_;
};

// Coarse-to-fine pair of gated encoder/decoders without normalization. The
// refinement stage sees the coarse result pasted into the holes.
template <typename T>
class FreeFormGenerator final : public Generator<T> {
 public:
  FreeFormGenerator(const GeneratorConfig& cfg, Rng& rng) : Generator<T>(cfg) {
    build(coarse_, "coarse", rng);
    build(refine_, "refine", rng);
  }

  GeneratorOutput<T> forward(const Var<T>& masked_image, const Var<T>& mask) const override {
    this->check_inputs(masked_image, mask);
    GeneratorOutput<T> out;
    out.coarse = run(coarse_, stack_input(masked_image, mask), &out.bottleneck_shape);
    const Tensor<T> m3 = expand_mask(mask.value(), 3);
    auto pasted = compose_output(out.coarse, masked_image, m3);
    out.output = run(refine_, stack_input(pasted, mask), nullptr);
    return out;
  }

 private:
  struct Stage {
    GatedConv2d<T> stem, down1, down2, dil2, dil4, up1, up2;
    Conv2d<T> out;
  };

  void build(Stage& s, const std::string& name, Rng& rng) {
    auto& p = this->params_;
    const int f = this->config_.base_filters;
    s.stem = {p, name + ".stem", 4, f, 5, {1, 2, 1}, Activation::elu, rng};
    s.down1 = {p, name + ".down1", f, 2 * f, 3, down3, Activation::elu, rng};
    s.down2 = {p, name + ".down2", 2 * f, 4 * f, 3, down3, Activation::elu, rng};
    s.dil2 = {p, name + ".dil2", 4 * f, 4 * f, 3, {1, 2, 2}, Activation::elu, rng};
    s.dil4 = {p, name + ".dil4", 4 * f, 4 * f, 3, {1, 4, 4}, Activation::elu, rng};
    s.up1 = {p, name + ".up1", 4 * f, 2 * f, 3, same3, Activation::elu, rng};
    s.up2 = {p, name + ".up2", 2 * f, f, 3, same3, Activation::elu, rng};
    s.out = {p, name + ".out", f, 3, 3, same3, rng};
  }

  Var<T> run(const Stage& s, const Var<T>& input, Shape* bottleneck) const {
    auto x = s.down2(s.down1(s.stem(input)));
    x = s.dil4(s.dil2(x));
    if (bottleneck) *bottleneck = x.shape();
    x = s.up2(upsample2(s.up1(upsample2(x))));
    return ag::tanh(s.out(x));
  }

  Stage coarse_, refine_;
};

}  // namespace

template <typename T>
std::unique_ptr<Generator<T>> make_generator(const GeneratorConfig& config, std::uint64_t init_key) {
  config.validate();
  Rng rng(init_key);
  switch (config.family) {
    case ModelFamily::custom: return std::make_unique<CustomGenerator<T>>(config, rng);
    case ModelFamily::context_encoder: return std::make_unique<ContextEncoderGenerator<T>>(config, rng);
    case ModelFamily::free_form: return std::make_unique<FreeFormGenerator<T>>(config, rng);
  }
  throw ConfigurationError("unknown generator family");
}

template <typename T>
Tensor<T> masks_to_tensor(std::span<const Mask> masks) {
  if (masks.empty()) return Tensor<T>({0, 1, 0, 0});
  const int h = masks[0].height, w = masks[0].width;
  Tensor<T> out({static_cast<int>(masks.size()), 1, h, w});
  for (std::size_t n = 0; n < masks.size(); ++n) {
    if (masks[n].height != h || masks[n].width != w)
      throw ConfigurationError("masks in one batch must share a resolution");
    for (std::size_t i = 0; i < masks[n].grid.size(); ++i)
      out[n * masks[n].grid.size() + i] = static_cast<T>(masks[n].grid[i]);
  }
  return out;
}

template <typename T>
Tensor<T> expand_mask(const Tensor<T>& mask, int channels) {
  if (mask.rank() != 4 || mask.dim(1) != 1) throw ConfigurationError("expand_mask: expected N×1×H×W mask");
  const int N = mask.dim(0), H = mask.dim(2), W = mask.dim(3);
  const std::size_t M = static_cast<std::size_t>(H) * W;
  Tensor<T> out({N, channels, H, W});
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < channels; ++c)
      std::copy(mask.ptr() + n * M, mask.ptr() + (n + 1) * M, out.ptr() + (static_cast<std::size_t>(n) * channels + c) * M);
  return out;
}

template <typename T>
Tensor<T> apply_holes(const Tensor<T>& images, const Tensor<T>& mask) {
  const Tensor<T> m = mask.shape() == images.shape() ? mask : expand_mask(mask, images.dim(1));
  require_same_shape(m.shape(), images.shape(), "apply_holes");
  Tensor<T> out = images;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (m[i] != T(0)) out[i] = T(0);
  return out;
}

template <typename T>
ag::Var<T> compose_output(const ag::Var<T>& raw, const ag::Var<T>& original, const Tensor<T>& mask) {
  require_same_shape(raw.shape(), original.shape(), "compose_output");
  const Tensor<T> m = mask.shape() == raw.shape() ? mask : expand_mask(mask, raw.value().dim(1));
  require_same_shape(m.shape(), raw.shape(), "compose_output mask");
  Tensor<T> keep(m.shape());
  for (std::size_t i = 0; i < m.size(); ++i) keep[i] = T(1) - m[i];
  // A product with an exact 0/1 factor followed by a sum with an exact zero
  // leaves valid pixels bit-identical to the original.
  return ag::add(ag::mul(raw, ag::Var<T>::constant(m)), ag::mul(original, ag::Var<T>::constant(std::move(keep))));
}

#define PGI_INSTANTIATE_GEN(T)                                                                  \
  template class Generator<T>;                                                                  \
  template std::unique_ptr<Generator<T>> make_generator(const GeneratorConfig&, std::uint64_t); \
  template Tensor<T> masks_to_tensor(std::span<const Mask>);                                    \
  template Tensor<T> expand_mask(const Tensor<T>&, int);                                        \
  template Tensor<T> apply_holes(const Tensor<T>&, const Tensor<T>&);                           \
  template ag::Var<T> compose_output(const ag::Var<T>&, const ag::Var<T>&, const Tensor<T>&);

PGI_INSTANTIATE_GEN(float)
PGI_INSTANTIATE_GEN(double)

}  // namespace pgi
