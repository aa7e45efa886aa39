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
#include <fstream>

#include "pgi/common/error.hpp"
#include "pgi/nets/archive.hpp"
#include "pgi/nets/discriminator.hpp"
#include "pgi/nets/generator.hpp"
#include "support.hpp"

namespace pgi {
namespace {

using VD = ag::Var<double>;
using VF = ag::Var<float>;

Tensor<double> random_tensor(Shape s, std::uint64_t key, double scale = 1.0) {
  Tensor<double> t(std::move(s));
  Rng rng(key);
  for (auto& v : t.data()) v = scale * rng.normal();
  return t;
}

Tensor<float> random_image(int n, int res, std::uint64_t key) {
  Tensor<float> t({n, 3, res, res});
  Rng rng(key);
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-1, 1));
  return t;
}

TEST(GatedConv, ZeroGateHalvesFeaturePath) {
  const VD x = VD::constant(random_tensor({2, 3, 6, 6}, 1));
  const ConvKernel<double> feat{VD::constant(random_tensor({4, 3, 3, 3}, 2)), VD::constant(random_tensor({4}, 3))};
  const ConvKernel<double> gate{VD::constant(Tensor<double>({4, 3, 3, 3})), VD::constant(Tensor<double>({4}))};
  const auto out = gated_conv_forward(x, feat, gate, Activation::elu, {1, 1, 1});
  const auto ref = activate(ag::conv2d(x, feat.weight, feat.bias, {1, 1, 1}), Activation::elu);
  for (std::size_t i = 0; i < out.value().size(); ++i) EXPECT_EQ(out.value()[i], 0.5 * ref.value()[i]);
}

TEST(GatedConv, SaturatedGatePassesFeaturePath) {
  const VD x = VD::constant(random_tensor({1, 2, 5, 5}, 4));
  const ConvKernel<double> feat{VD::constant(random_tensor({3, 2, 3, 3}, 5)), VD::constant(random_tensor({3}, 6))};
  Tensor<double> big({3});
  big.fill(20.0);
  const ConvKernel<double> gate{VD::constant(Tensor<double>({3, 2, 3, 3})), VD::constant(big)};
  const auto out = gated_conv_forward(x, feat, gate, Activation::elu, {1, 1, 1});
  const auto ref = activate(ag::conv2d(x, feat.weight, feat.bias, {1, 1, 1}), Activation::elu);
  for (std::size_t i = 0; i < out.value().size(); ++i) EXPECT_NEAR(out.value()[i], ref.value()[i], 1e-6);
}

TEST(GatedConv, HandOracleOnePixel) {
  const double logit = std::log(0.7 / 0.3);
  const VD x = VD::constant(Tensor<double>({1, 1, 1, 1}, {1.0}));
  const ConvKernel<double> feat{VD::constant(Tensor<double>({1, 1, 1, 1}, {2.0})), VD()};
  const ConvKernel<double> gate{VD::constant(Tensor<double>({1, 1, 1, 1}, {logit})), VD()};
  const auto out = gated_conv_forward(x, feat, gate, Activation::identity, {1, 0, 1});
  EXPECT_NEAR(out.item(), 1.4, 1e-12);
}

TEST(GatedConv, MismatchedKernelsRejected) {
  const VD x = VD::constant(random_tensor({1, 2, 5, 5}, 4));
  const ConvKernel<double> feat{VD::constant(random_tensor({3, 2, 3, 3}, 5)), VD()};
  const ConvKernel<double> gate{VD::constant(random_tensor({3, 2, 1, 1}, 5)), VD()};
  EXPECT_THROW(gated_conv_forward(x, feat, gate, Activation::elu, {1, 1, 1}), ConfigurationError);
}

TEST(GatedConv, OutputBoundedByActivation) {
  const VD x = VD::constant(random_tensor({2, 3, 7, 7}, 7));
  const ConvKernel<double> feat{VD::constant(random_tensor({5, 3, 3, 3}, 8)), VD::constant(random_tensor({5}, 9))};
  const ConvKernel<double> gate{VD::constant(random_tensor({5, 3, 3, 3}, 10)), VD::constant(random_tensor({5}, 11))};
  const auto out = gated_conv_forward(x, feat, gate, Activation::elu, {1, 1, 1});
  const auto ref = activate(ag::conv2d(x, feat.weight, feat.bias, {1, 1, 1}), Activation::elu);
  for (std::size_t i = 0; i < out.value().size(); ++i) EXPECT_LE(std::abs(out.value()[i]), std::abs(ref.value()[i]));
}

TEST(InstanceNorm, ConstantChannelIsZero) {
  Tensor<double> t({1, 2, 4, 4});
  t.fill(3.25);
  const auto out = instance_normalize(VD::constant(t));
  for (double v : out.value().data()) EXPECT_EQ(v, 0.0);
}

TEST(InstanceNorm, ZeroMeanUnitVariance) {
  const auto out = instance_normalize(VD::constant(random_tensor({2, 3, 8, 8}, 12, 4.0)), 1e-5);
  for (int n = 0; n < 2; ++n)
    for (int c = 0; c < 3; ++c) {
      double s = 0, s2 = 0;
      for (int h = 0; h < 8; ++h)
        for (int w = 0; w < 8; ++w) s += out.value().at(n, c, h, w);
      const double mean = s / 64;
      for (int h = 0; h < 8; ++h)
        for (int w = 0; w < 8; ++w) s2 += std::pow(out.value().at(n, c, h, w) - mean, 2);
      EXPECT_NEAR(mean, 0.0, 1e-12);
      EXPECT_NEAR(s2 / 64, 1.0, 1e-5);
    }
}

TEST(InstanceNorm, BatchIndependence) {
  const auto a = random_tensor({1, 3, 5, 5}, 13), b = random_tensor({1, 3, 5, 5}, 14, 9.0);
  const auto alone = instance_normalize(VD::constant(a));
  const auto both = instance_normalize(VD::constant(concat_batch<double>(std::vector<Tensor<double>>{a, b})));
  for (std::size_t i = 0; i < alone.value().size(); ++i) EXPECT_EQ(alone.value()[i], both.value()[i]);
}

// Spatial trace of the custom encoder: stride-1 stem, two stride-2 3×3 stages.
int custom_bottleneck_side(int res) {
  int s = res;
  for (int i = 0; i < 2; ++i) s = (s + 2 - 3) / 2 + 1;
  return s;
}

TEST(Generator, CustomShapes) {
  for (int res : {64, 128}) {
    GeneratorConfig cfg;
    cfg.base_filters = 8;
    cfg.resolution = res;
    auto g = make_generator<float>(cfg, 1);
    const auto img = random_image(1, res, 2);
    Tensor<float> m({1, 1, res, res});
    const auto out = g->forward(VF::constant(img), VF::constant(m));
    EXPECT_EQ(out.output.shape(), (Shape{1, 3, res, res}));
    EXPECT_EQ(out.bottleneck_shape, (Shape{1, 32, custom_bottleneck_side(res), custom_bottleneck_side(res)}));
    EXPECT_EQ(out.bottleneck_shape[2], res / 4);
    for (float v : out.output.value().data()) {
      EXPECT_GE(v, -1.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(Generator, AllFamiliesPreserveShape) {
  for (auto fam : {ModelFamily::custom, ModelFamily::context_encoder, ModelFamily::free_form})
    for (int res : {32, 48}) {
      GeneratorConfig cfg;
      cfg.family = fam;
      cfg.base_filters = 8;
      cfg.resolution = res;
      auto g = make_generator<float>(cfg, 3);
      Tensor<float> m({2, 1, res, res});
      const auto out = g->forward(VF::constant(random_image(2, res, 4)), VF::constant(m));
      EXPECT_EQ(out.output.shape(), (Shape{2, 3, res, res})) << to_string(fam);
    }
}

TEST(Generator, ConfigErrors) {
  GeneratorConfig cfg;
  cfg.resolution = 30;
  EXPECT_THROW(make_generator<float>(cfg, 1), ConfigurationError);
  cfg.resolution = 32;
  cfg.base_filters = 4;
  EXPECT_THROW(make_generator<float>(cfg, 1), ConfigurationError);
  cfg.base_filters = 8;
  auto g = make_generator<float>(cfg, 1);
  Tensor<float> m({1, 1, 16, 16});
  EXPECT_THROW(g->forward(VF::constant(random_image(1, 32, 1)), VF::constant(m)), ConfigurationError);
}

TEST(Generator, InitIsDeterministic) {
  GeneratorConfig cfg;
  cfg.resolution = 32;
  cfg.base_filters = 8;
  auto a = make_generator<float>(cfg, 77), b = make_generator<float>(cfg, 77);
  for (const auto& n : a->params().names()) EXPECT_EQ(a->params()[n].value(), b->params()[n].value());
}

TEST(Discriminator, CustomMultiScale) {
  DiscriminatorConfig cfg;
  cfg.base_filters = 8;
  cfg.resolution = 128;
  auto d = make_discriminator<float>(cfg, 1);
  const auto out = d->forward(VF::constant(random_image(4, 128, 5)));
  ASSERT_EQ(out.features.size(), 5u);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_LT(out.features[i].shape()[2], out.features[i - 1].shape()[2]);
  EXPECT_EQ(out.features[3].shape()[1], out.features[4].shape()[1]);
  EXPECT_EQ(out.features[3].shape()[1], 8 * 8);
  ASSERT_GE(out.scores.size(), 2u);
  for (const auto& s : out.scores) EXPECT_EQ(s.shape()[0], 4);
  for (const auto& f : out.features) EXPECT_EQ(f.shape()[0], 4);
}

int receptive_field_oracle(const std::vector<std::pair<int, int>>& ks) {
  int rf = 1;
  for (auto it = ks.rbegin(); it != ks.rend(); ++it) rf = (rf - 1) * it->second + it->first;
  return rf;
}

TEST(Discriminator, PatchReceptiveField70) {
  DiscriminatorConfig cfg;
  cfg.family = ModelFamily::free_form;
  cfg.base_filters = 8;
  cfg.resolution = 64;
  auto d = make_discriminator<float>(cfg, 1);
  EXPECT_EQ(d->receptive_field(), 70);
  EXPECT_EQ(receptive_field_oracle({{4, 2}, {4, 2}, {4, 2}, {4, 1}, {4, 1}}), 70);
  const auto out = d->forward(VF::constant(random_image(4, 64, 6)));
  ASSERT_EQ(out.scores.size(), 1u);
  EXPECT_EQ(out.scores[0].shape()[0], 4);
  EXPECT_EQ(out.scores[0].shape()[1], 1);
  EXPECT_EQ(receptive_field({{3, 1}, {3, 1}, {3, 2}}), receptive_field_oracle({{3, 1}, {3, 1}, {3, 2}}));
}

TEST(Discriminator, ContextEncoderScalarScore) {
  DiscriminatorConfig cfg;
  cfg.family = ModelFamily::context_encoder;
  cfg.base_filters = 8;
  cfg.resolution = 32;
  auto d = make_discriminator<float>(cfg, 1);
  const auto out = d->forward(VF::constant(random_image(3, 32, 7)));
  ASSERT_EQ(out.scores.size(), 1u);
  EXPECT_EQ(out.scores[0].shape(), (Shape{3, 1, 1, 1}));
}

TEST(Discriminator, ConfigMismatchRejected) {
  DiscriminatorConfig cfg;
  cfg.num_layers = 4;
  EXPECT_THROW(make_discriminator<float>(cfg, 1), ConfigurationError);
  cfg = {};
  cfg.family = ModelFamily::free_form;
  cfg.patch_size = 34;
  EXPECT_THROW(make_discriminator<float>(cfg, 1), ConfigurationError);
  cfg = {};
  cfg.resolution = 64;
  auto d = make_discriminator<float>(cfg, 1);
  EXPECT_THROW(d->forward(VF::constant(random_image(1, 32, 1))), ConfigurationError);
}

TEST(Compose, ZeroAndOneMasks) {
  const auto raw = random_image(2, 8, 1), orig = random_image(2, 8, 2);
  Tensor<float> zeros({2, 1, 8, 8}), ones({2, 1, 8, 8});
  ones.fill(1.0f);
  EXPECT_EQ(compose_output(VF::constant(raw), VF::constant(orig), zeros).value(), orig);
  EXPECT_EQ(compose_output(VF::constant(raw), VF::constant(orig), ones).value(), raw);
}

TEST(Compose, HalfHoleMean) {
  Tensor<double> raw({1, 3, 4, 4}), orig({1, 3, 4, 4}), m({1, 1, 4, 4});
  raw.fill(0.3);
  orig.fill(0.7);
  for (int h = 0; h < 2; ++h)
    for (int w = 0; w < 4; ++w) m.at(0, 0, h, w) = 1;
  const auto out = compose_output(VD::constant(raw), VD::constant(orig), m).value();
  double s = 0;
  for (double v : out.data()) s += v;
  EXPECT_NEAR(s / static_cast<double>(out.size()), 0.5, 1e-15);
}

TEST(Compose, ValidPixelsBitIdentical) {
  const auto raw = random_image(2, 16, 3), orig = random_image(2, 16, 4);
  const Mask mk = generate_freeform_mask(16, MaskSpec::free_form_for_fraction(0.4, 16), 1);
  std::vector<Mask> masks{mk, mk};
  const auto m = masks_to_tensor<float>(masks);
  const auto out = compose_output(VF::constant(raw), VF::constant(orig), m).value();
  for (int n = 0; n < 2; ++n)
    for (int c = 0; c < 3; ++c)
      for (int h = 0; h < 16; ++h)
        for (int w = 0; w < 16; ++w)
          if (!mk.at(h, w)) {
            EXPECT_EQ(out.at(n, c, h, w), orig.at(n, c, h, w));
          }
}

TEST(Archive, RoundTripBitExact) {
  test::TempDir dir("archive");
  Archive a;
  a.manifest = {{"iteration", 7}, {"note", "x"}};
  Tensor<float> t({2, 3});
  t.storage() = {1.5f, -0.0f, 3.4028235e38f, 1e-45f, NAN, 2.0f};
  a.tensors["w"] = t;
  a.tensors["b"] = Tensor<float>({1}, {0.1f});
  write_archive(dir / "a.pgi", a);
  const Archive b = read_archive(dir / "a.pgi");
  EXPECT_EQ(b.manifest.at("iteration"), 7);
  ASSERT_EQ(b.tensors.size(), 2u);
  const auto& w = b.tensors.at("w");
  EXPECT_EQ(std::memcmp(w.ptr(), t.ptr(), t.size() * sizeof(float)), 0);
}

TEST(Archive, CorruptionDetected) {
  test::TempDir dir("archive_bad");
  Archive a;
  a.tensors["w"] = Tensor<float>({4}, {1, 2, 3, 4});
  write_archive(dir / "a.pgi", a);
  std::string bytes = test::slurp(dir / "a.pgi");
  bytes[bytes.size() - 12] ^= 0x5a;
  std::ofstream(dir / "b.pgi", std::ios::binary) << bytes;
  EXPECT_THROW(read_archive(dir / "b.pgi"), IntegrityError);
  std::ofstream(dir / "c.pgi", std::ios::binary) << bytes.substr(0, 20);
  EXPECT_THROW(read_archive(dir / "c.pgi"), IntegrityError);
  std::ofstream(dir / "d.pgi", std::ios::binary) << "NOTANARCHIVE....";
  EXPECT_THROW(read_archive(dir / "d.pgi"), IntegrityError);
}

TEST(Archive, ManifestDiffNamesChangedKeys) {
  const nlohmann::json a = {{"seed", 1}, {"setup", "a"}, {"same", 3}};
  const nlohmann::json b = {{"seed", 2}, {"setup", "a"}, {"same", 3}};
  const std::string d = manifest_diff(a, b);
  EXPECT_NE(d.find("seed"), std::string::npos);
  EXPECT_EQ(d.find("same"), std::string::npos);
}

}  // namespace
}  // namespace pgi
