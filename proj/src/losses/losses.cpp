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

#include "pgi/losses/losses.hpp"

#include <cmath>

#include "pgi/common/rng.hpp"
#include "pgi/nets/archive.hpp"
#include "pgi/nets/generator.hpp"

namespace pgi {

std::string to_string(TrainingSetup setup) {
  switch (setup) {
    case TrainingSetup::a: return "a";
    case TrainingSetup::b: return "b";
    case TrainingSetup::c: return "c";
    case TrainingSetup::d: return "d";
  }
  return "?";
}

TrainingSetup parse_setup(const std::string& name) {
  if (name == "a") return TrainingSetup::a;
  if (name == "b") return TrainingSetup::b;
  if (name == "c") return TrainingSetup::c;
  if (name == "d") return TrainingSetup::d;
  throw ParameterError("unknown training setup '" + name + "' (expected a, b, c or d)");
}

LossWeights LossWeights::preset(ModelFamily family) {
  switch (family) {
    case ModelFamily::custom: return {1.0, 6.0, 0.1, 1.0};
    case ModelFamily::context_encoder: return {0.0, 0.999, 0.0, 0.001};
    case ModelFamily::free_form: return {1.0, 1.0, 0.0, 1.0};
  }
  return {};
}

void LossWeights::validate() const {
  for (double w : {w_valid_l1, w_hole_l1, w_perceptual, w_adversarial})
    if (!std::isfinite(w) || w < 0) throw ParameterError("loss weights must be finite and non-negative");
  if (w_valid_l1 <= 0 && w_hole_l1 <= 0 && w_perceptual <= 0)
    throw ParameterError("at least one reconstruction weight must be positive");
}

double LossBreakdown::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return t.value;
  throw ParameterError("no loss term named " + name);
}

double LossBreakdown::weighted_sum() const {
  double s = 0;
  for (const auto& t : terms) s += t.weight * t.value;
  return s;
}

namespace {

template <typename T>
void require_scores(std::span<const ag::Var<T>> scores, const char* what) {
  if (scores.empty()) throw ParameterError(std::string(what) + ": empty score collection");
  for (const auto& s : scores)
    if (!s.defined() || s.value().empty()) throw ParameterError(std::string(what) + ": empty score map");
}

template <typename T>
ag::Var<T> average(std::vector<ag::Var<T>> parts) {
  ag::Var<T> acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = ag::add(acc, parts[i]);
  return ag::scale(acc, T(1) / static_cast<T>(parts.size()));
}

template <typename T>
Tensor<T> region_weights(const Shape& image_shape, const Tensor<T>& mask, Region region, bool& empty) {
  const Tensor<T> m = mask.shape() == image_shape ? mask : expand_mask(mask, image_shape.at(1));
  require_same_shape(m.shape(), image_shape, "region loss mask");
  Tensor<T> w(image_shape);
  std::size_t count = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const bool in = region == Region::hole ? m[i] != T(0) : m[i] == T(0);
    w[i] = in ? T(1) : T(0);
    count += in;
  }
  empty = count == 0;
  if (!empty)
    for (auto& v : w.data()) v /= static_cast<T>(count);
  return w;
}

template <typename T>
ag::Var<T> zero_scalar() {
  return ag::Var<T>::constant(Tensor<T>({1}, T(0)));
}

}  // namespace

template <typename T>
ag::Var<T> lsgan_d_loss(std::span<const ag::Var<T>> real_scores, std::span<const ag::Var<T>> fake_scores) {
  require_scores(real_scores, "lsgan_d_loss");
  require_scores(fake_scores, "lsgan_d_loss");
  if (real_scores.size() != fake_scores.size()) throw ParameterError("lsgan_d_loss: head count mismatch");
  std::vector<ag::Var<T>> heads;
  for (std::size_t i = 0; i < real_scores.size(); ++i) {
    auto r = ag::mean(ag::square(ag::add_scalar(real_scores[i], T(-1))));
    auto f = ag::mean(ag::square(fake_scores[i]));
    heads.push_back(ag::scale(ag::add(r, f), T(0.5)));
  }
  return average(std::move(heads));
}

template <typename T>
ag::Var<T> lsgan_g_loss(std::span<const ag::Var<T>> fake_scores) {
  require_scores(fake_scores, "lsgan_g_loss");
  std::vector<ag::Var<T>> heads;
  for (const auto& f : fake_scores) heads.push_back(ag::scale(ag::mean(ag::square(ag::add_scalar(f, T(-1)))), T(0.5)));
  return average(std::move(heads));
}

template <typename T>
ag::Var<T> hinge_d_loss(std::span<const ag::Var<T>> real_scores, std::span<const ag::Var<T>> fake_scores) {
  require_scores(real_scores, "hinge_d_loss");
  require_scores(fake_scores, "hinge_d_loss");
  if (real_scores.size() != fake_scores.size()) throw ParameterError("hinge_d_loss: head count mismatch");
  std::vector<ag::Var<T>> heads;
  for (std::size_t i = 0; i < real_scores.size(); ++i) {
    auto r = ag::mean(ag::relu(ag::add_scalar(ag::scale(real_scores[i], T(-1)), T(1))));
    auto f = ag::mean(ag::relu(ag::add_scalar(fake_scores[i], T(1))));
    heads.push_back(ag::add(r, f));
  }
  return average(std::move(heads));
}

template <typename T>
ag::Var<T> hinge_g_loss(std::span<const ag::Var<T>> fake_scores) {
  require_scores(fake_scores, "hinge_g_loss");
  std::vector<ag::Var<T>> heads;
  for (const auto& f : fake_scores) heads.push_back(ag::scale(ag::mean(f), T(-1)));
  return average(std::move(heads));
}

template <typename T>
ag::Var<T> bce_d_loss(std::span<const ag::Var<T>> real_scores, std::span<const ag::Var<T>> fake_scores) {
  require_scores(real_scores, "bce_d_loss");
  require_scores(fake_scores, "bce_d_loss");
  if (real_scores.size() != fake_scores.size()) throw ParameterError("bce_d_loss: head count mismatch");
  std::vector<ag::Var<T>> heads;
  for (std::size_t i = 0; i < real_scores.size(); ++i) {
    // −log σ(r) = softplus(−r); −log(1 − σ(f)) = softplus(f)
    auto r = ag::mean(ag::softplus(ag::scale(real_scores[i], T(-1))));
    auto f = ag::mean(ag::softplus(fake_scores[i]));
    heads.push_back(ag::add(r, f));
  }
  return average(std::move(heads));
}

template <typename T>
ag::Var<T> bce_g_loss(std::span<const ag::Var<T>> fake_scores) {
  require_scores(fake_scores, "bce_g_loss");
  std::vector<ag::Var<T>> heads;
  for (const auto& f : fake_scores) heads.push_back(ag::mean(ag::softplus(ag::scale(f, T(-1)))));
  return average(std::move(heads));
}

template <typename T>
ag::Var<T> region_l1(const ag::Var<T>& ground_truth, const ag::Var<T>& prediction, const Tensor<T>& mask,
                     Region region) {
  if (ground_truth.shape() != prediction.shape())
    throw ParameterError("region_l1: shape mismatch " + to_string(ground_truth.shape()) + " vs " +
                         to_string(prediction.shape()));
  bool empty = false;
  auto w = region_weights(prediction.shape(), mask, region, empty);
  if (empty) return zero_scalar<T>();
  return ag::sum(ag::mul(ag::abs(ag::sub(prediction, ground_truth)), ag::Var<T>::constant(std::move(w))));
}

template <typename T>
ag::Var<T> region_l2(const ag::Var<T>& ground_truth, const ag::Var<T>& prediction, const Tensor<T>& mask,
                     Region region) {
  if (ground_truth.shape() != prediction.shape())
    throw ParameterError("region_l2: shape mismatch " + to_string(ground_truth.shape()) + " vs " +
                         to_string(prediction.shape()));
  bool empty = false;
  auto w = region_weights(prediction.shape(), mask, region, empty);
  if (empty) return zero_scalar<T>();
  return ag::sum(ag::mul(ag::square(ag::sub(prediction, ground_truth)), ag::Var<T>::constant(std::move(w))));
}

template <typename T>
FixedConvExtractor<T>::FixedConvExtractor(std::vector<FixedConvLayer<T>> layers, std::string name)
    : layers_(std::move(layers)), name_(std::move(name)) {
  if (layers_.empty()) throw ConfigurationError("feature extractor needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weight.rank() != 4) throw ConfigurationError("extractor layer weight must be O×C×k×k");
    if (!l.bias.empty() && l.bias.size() != static_cast<std::size_t>(l.weight.dim(0)))
      throw ConfigurationError("extractor layer bias size mismatch");
    if (i > 0 && l.weight.dim(1) != layers_[i - 1].weight.dim(0))
      throw ConfigurationError("extractor layer " + std::to_string(i) + " input channels do not chain");
  }
}

template <typename T>
std::vector<ag::Var<T>> FixedConvExtractor<T>::extract(const ag::Var<T>& images) const {
  std::vector<ag::Var<T>> out;
  ag::Var<T> x = images;
  for (const auto& l : layers_) {
    auto b = l.bias.empty() ? ag::Var<T>() : ag::Var<T>::constant(l.bias);
    x = ag::conv2d(x, ag::Var<T>::constant(l.weight), b, l.options);
    if (l.relu) x = ag::relu(x);
    out.push_back(x);
  }
  return out;
}

template <typename T>
std::unique_ptr<FeatureExtractor<T>> make_random_conv_extractor(std::uint64_t seed) {
  Rng rng(seed);
  auto layer = [&](int in, int out, int stride) {
    FixedConvLayer<T> l;
    l.weight = Tensor<T>({out, in, 3, 3});
    const double std = std::sqrt(2.0 / (in * 9));
    for (auto& v : l.weight.data()) v = static_cast<T>(std * rng.normal());
    l.bias = Tensor<T>({out});
    l.options = {stride, 1, 1};
    return l;
  };
  std::vector<FixedConvLayer<T>> layers{layer(3, 8, 1), layer(8, 16, 2)};
  return std::make_unique<FixedConvExtractor<T>>(std::move(layers), "random_conv");
}

template <typename T>
std::unique_ptr<FeatureExtractor<T>> load_conv_extractor(const std::filesystem::path& path) {
  if (path.empty() || !std::filesystem::exists(path))
    throw ConfigurationError("perceptual feature extractor unavailable: '" + path.string() +
                             "' not found (full profile needs a converted conv-stack archive)");
  const Archive a = read_archive(path);
  const auto strides = a.manifest.value("strides", std::vector<int>{});
  const auto paddings = a.manifest.value("paddings", std::vector<int>{});
  std::vector<FixedConvLayer<T>> layers;
  for (std::size_t i = 0;; ++i) {
    auto w = a.tensors.find("layer" + std::to_string(i) + ".w");
    if (w == a.tensors.end()) break;
    FixedConvLayer<T> l;
    l.weight = w->second.template cast<T>();
    if (auto b = a.tensors.find("layer" + std::to_string(i) + ".b"); b != a.tensors.end()) l.bias = b->second.template cast<T>();
    l.options.stride = i < strides.size() ? strides[i] : 1;
    l.options.padding = i < paddings.size() ? paddings[i] : l.weight.dim(2) / 2;
    layers.push_back(std::move(l));
  }
  if (layers.empty()) throw ConfigurationError("extractor archive " + path.string() + " holds no layer<i>.w tensors");
  return std::make_unique<FixedConvExtractor<T>>(std::move(layers), "archive:" + path.filename().string());
}

template <typename T>
ag::Var<T> perceptual_loss(const ag::Var<T>& ground_truth, const ag::Var<T>& prediction,
                           const FeatureExtractor<T>* extractor) {
  if (!extractor) throw ConfigurationError("perceptual loss requested without a feature extractor");
  if (ground_truth.shape() != prediction.shape()) throw ParameterError("perceptual_loss: shape mismatch");
  const auto real = extractor->extract(ag::detach(ground_truth));
  const auto fake = extractor->extract(prediction);
  if (real.empty()) throw ConfigurationError("feature extractor exposes no layers");
  ag::Var<T> total;
  for (std::size_t i = 0; i < real.size(); ++i) {
    auto term = ag::mean(ag::abs(ag::sub(fake[i], real[i])));
    total = total.defined() ? ag::add(total, term) : term;
  }
  return total;
}

double adversarial_weight_for_iteration(TrainingSetup setup, const CurriculumSchedule& schedule, long long iteration,
                                        double base_weight) {
  const int stage = stage_for_iteration(schedule, iteration);
  switch (setup) {
    case TrainingSetup::a:
    case TrainingSetup::b: return base_weight;
    case TrainingSetup::c: return 2 * iteration < schedule.total_iterations() ? 0.0 : base_weight;
    case TrainingSetup::d:
      if (!schedule.adv_weight_per_stage.empty()) return schedule.adv_weight_per_stage[static_cast<std::size_t>(stage)];
      return base_weight * static_cast<double>(stage + 1) / static_cast<double>(schedule.num_stages);
  }
  throw ParameterError("unknown training setup");
}

#define PGI_INSTANTIATE_LOSSES(T)                                                                                   \
  template ag::Var<T> lsgan_d_loss(std::span<const ag::Var<T>>, std::span<const ag::Var<T>>);                      \
  template ag::Var<T> lsgan_g_loss(std::span<const ag::Var<T>>);                                                   \
  template ag::Var<T> hinge_d_loss(std::span<const ag::Var<T>>, std::span<const ag::Var<T>>);                      \
  template ag::Var<T> hinge_g_loss(std::span<const ag::Var<T>>);                                                   \
  template ag::Var<T> bce_d_loss(std::span<const ag::Var<T>>, std::span<const ag::Var<T>>);                        \
  template ag::Var<T> bce_g_loss(std::span<const ag::Var<T>>);                                                     \
  template ag::Var<T> region_l1(const ag::Var<T>&, const ag::Var<T>&, const Tensor<T>&, Region);                   \
  template ag::Var<T> region_l2(const ag::Var<T>&, const ag::Var<T>&, const Tensor<T>&, Region);                   \
  template class FixedConvExtractor<T>;                                                                             \
  template std::unique_ptr<FeatureExtractor<T>> make_random_conv_extractor(std::uint64_t);                         \
  template std::unique_ptr<FeatureExtractor<T>> load_conv_extractor(const std::filesystem::path&);                 \
  template ag::Var<T> perceptual_loss(const ag::Var<T>&, const ag::Var<T>&, const FeatureExtractor<T>*);

PGI_INSTANTIATE_LOSSES(float)
PGI_INSTANTIATE_LOSSES(double)

}  // namespace pgi
