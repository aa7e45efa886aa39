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

#include "pgi/eval/classifier.hpp"

#include <cmath>
#include <numeric>

#include "pgi/common/error.hpp"
#include "pgi/data/dataset.hpp"
#include "pgi/nets/archive.hpp"

namespace pgi {

namespace {

constexpr int kChunk = 64;
constexpr float kSlope = 0.2f;

Shape conv_shape(int layer, const ClassifierConfig& c) {
  const int in = layer == 0 ? 3 : c.base_filters << (layer - 1);
  return {c.base_filters << layer, in, 3, 3};
}

Tensor<float> gather(const Tensor<float>& images, std::span<const std::size_t> idx) {
  const std::size_t per = images.size() / static_cast<std::size_t>(images.dim(0));
  Shape s = images.shape();
  s[0] = static_cast<int>(idx.size());
  Tensor<float> out(s);
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(images.ptr() + idx[i] * per, per, out.ptr() + i * per);
  return out;
}

}  // namespace

void ClassifierConfig::validate() const {
  if (base_filters < 1) throw ConfigurationError("classifier base_filters must be >= 1");
  if (num_classes < 2) throw ConfigurationError("classifier needs at least 2 classes");
  if (input_resolution < 8 || input_resolution % 8 != 0)
    throw ConfigurationError("classifier input_resolution must be a multiple of 8");
  if (!class_names.empty() && static_cast<int>(class_names.size()) != num_classes)
    throw ConfigurationError("classifier class_names size differs from num_classes");
}

ConvClassifier::ConvClassifier(ClassifierConfig config, std::uint64_t init_key) : config_(std::move(config)) {
  config_.validate();
  Rng rng(init_key);
  for (int l = 0; l < 3; ++l) {
    const Shape s = conv_shape(l, config_);
    const double he = std::sqrt(2.0 / (s[1] * 9));
    params_.add_normal("conv" + std::to_string(l) + ".w", s, he, rng);
    params_.add_constant("conv" + std::to_string(l) + ".b", {s[0]}, 0.0f);
  }
  const int d = config_.base_filters * 4;
  params_.add_normal("head.w", {config_.num_classes, d}, std::sqrt(1.0 / d), rng);
  params_.add_constant("head.b", {config_.num_classes}, 0.0f);
}

ag::Var<float> ConvClassifier::logits(const ag::Var<float>& images, ag::Var<float>* features) const {
  const int r = config_.input_resolution;
  ag::Var<float> h = images;
  if (images.value().dim(2) != r || images.value().dim(3) != r) h = ag::resize_bilinear(images, r, r);
  for (int l = 0; l < 3; ++l) {
    const std::string p = "conv" + std::to_string(l);
    h = ag::leaky_relu(ag::conv2d(h, params_[p + ".w"], params_[p + ".b"], {2, 1, 1}), kSlope);
  }
  ag::Var<float> pooled = ag::global_avg_pool(h);
  if (features) *features = pooled;
  return ag::linear(pooled, params_["head.w"], params_["head.b"]);
}

ClassifierOutputs ConvClassifier::run(const Tensor<float>& images) const {
  const int n = images.dim(0);
  const int d = config_.base_filters * 4, c = config_.num_classes;
  ClassifierOutputs out{Eigen::MatrixXd(n, d), Eigen::MatrixXd(n, c)};
  for (int lo = 0; lo < n; lo += kChunk) {
    const int hi = std::min(n, lo + kChunk);
    std::vector<std::size_t> idx(static_cast<std::size_t>(hi - lo));
    std::iota(idx.begin(), idx.end(), static_cast<std::size_t>(lo));
    ag::Var<float> feats;
    const auto lg = logits(ag::Var<float>::constant(gather(images, idx)), &feats);
    for (int i = 0; i < hi - lo; ++i) {
      for (int j = 0; j < d; ++j) out.features(lo + i, j) = feats.value()[static_cast<std::size_t>(i * d + j)];
      double mx = -INFINITY;
      for (int j = 0; j < c; ++j) mx = std::max(mx, static_cast<double>(lg.value()[static_cast<std::size_t>(i * c + j)]));
      double z = 0;
      for (int j = 0; j < c; ++j) {
        const double e = std::exp(lg.value()[static_cast<std::size_t>(i * c + j)] - mx);
        out.probabilities(lo + i, j) = e;
        z += e;
      }
      out.probabilities.row(lo + i) /= z;
    }
  }
  return out;
}

void ConvClassifier::save(const std::filesystem::path& path) const {
  Archive a;
  a.manifest = {{"format", "pgi-classifier"},
                {"base_filters", config_.base_filters},
                {"num_classes", config_.num_classes},
                {"input_resolution", config_.input_resolution},
                {"class_names", config_.class_names}};
  a.tensors = params_.snapshot();
  write_archive(path, a);
}

ConvClassifier ConvClassifier::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigurationError("classifier file not found: " + path.string());
  const Archive a = read_archive(path);
  if (a.manifest.value("format", "") != "pgi-classifier")
    throw IntegrityError(path.string() + " is not a classifier archive");
  ClassifierConfig c;
  c.base_filters = a.manifest.at("base_filters").get<int>();
  c.num_classes = a.manifest.at("num_classes").get<int>();
  c.input_resolution = a.manifest.at("input_resolution").get<int>();
  c.class_names = a.manifest.value("class_names", std::vector<std::string>{});
  ConvClassifier model(c, 0);
  model.params_.restore(a.tensors);
  return model;
}

ClassifierTrainReport train_classifier(ConvClassifier& model, const Tensor<float>& images, std::span<const int> labels,
                                       const ClassifierTrainOptions& options) {
  const std::size_t n = static_cast<std::size_t>(images.dim(0));
  if (labels.size() != n) throw ParameterError("train_classifier: label count differs from image count");
  if (options.batch_size < 1 || options.epochs < 1) throw ParameterError("train_classifier: bad epochs/batch size");
  Adam<float> opt(model.params(), {options.learning_rate, 0.9, 0.999, 1e-8});
  ClassifierTrainReport report;
  for (int e = 0; e < options.epochs; ++e) {
    const auto order = epoch_order(options.seed, static_cast<std::uint64_t>(e), n);
    double loss_sum = 0;
    int batches = 0;
    for (std::size_t lo = 0; lo < n; lo += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t hi = std::min(n, lo + static_cast<std::size_t>(options.batch_size));
      std::span<const std::size_t> idx(order.data() + lo, hi - lo);
      std::vector<int> y;
      for (auto i : idx) y.push_back(labels[i]);
      model.params().zero_grad();
      auto loss = ag::cross_entropy(model.logits(ag::Var<float>::constant(gather(images, idx))), std::span<const int>(y));
      ag::backward(loss);
      opt.step();
      loss_sum += loss.item();
      ++batches;
    }
    report.final_loss = loss_sum / batches;
  }
  report.train_accuracy = classifier_accuracy(model, images, labels);
  return report;
}

double classifier_accuracy(const ConvClassifier& model, const Tensor<float>& images, std::span<const int> labels) {
  const auto out = model.run(images);
  int hit = 0;
  for (Eigen::Index i = 0; i < out.probabilities.rows(); ++i) {
    Eigen::Index arg;
    out.probabilities.row(i).maxCoeff(&arg);
    hit += static_cast<int>(arg) == labels[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(hit) / static_cast<double>(out.probabilities.rows());
}

}  // namespace pgi
