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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pgi/tensor/optim.hpp"

namespace pgi {

struct ClassifierOutputs {
  Eigen::MatrixXd features;       // N×D pooled activations
  Eigen::MatrixXd probabilities;  // N×C softmax
};

/// Feature source for IS and FID. Images arrive as N×3×H×W in [-1, 1].
class FeatureModel {
 public:
  virtual ~FeatureModel() = default;
  virtual ClassifierOutputs run(const Tensor<float>& images) const = 0;
  virtual std::string name() const = 0;
};

struct ClassifierConfig {
  int base_filters = 8;
  int num_classes = 4;
  int input_resolution = 32;
  std::vector<std::string> class_names;

  void validate() const;
};

/// Three stride-2 3×3 convs with LeakyReLU, global average pooling (the
/// feature layer) and a linear head.
class ConvClassifier final : public FeatureModel {
 public:
  ConvClassifier(ClassifierConfig config, std::uint64_t init_key);

  /// Returns logits; `features` receives the pooled layer when non-null.
  ag::Var<float> logits(const ag::Var<float>& images, ag::Var<float>* features = nullptr) const;
  ClassifierOutputs run(const Tensor<float>& images) const override;
  std::string name() const override { return "conv_classifier"; }

  const ClassifierConfig& config() const noexcept { return config_; }
  ParamStore<float>& params() noexcept { return params_; }

  void save(const std::filesystem::path& path) const;
  static ConvClassifier load(const std::filesystem::path& path);

 private:
  ClassifierConfig config_;
  ParamStore<float> params_;
};

struct ClassifierTrainOptions {
  int epochs = 10;
  int batch_size = 16;
  double learning_rate = 2e-3;
  std::uint64_t seed = 1;
};

struct ClassifierTrainReport {
  double final_loss = 0;
  double train_accuracy = 0;
};

ClassifierTrainReport train_classifier(ConvClassifier& model, const Tensor<float>& images, std::span<const int> labels,
                                       const ClassifierTrainOptions& options);

/// Fraction of rows whose arg-max matches the label.
double classifier_accuracy(const ConvClassifier& model, const Tensor<float>& images, std::span<const int> labels);

}  // namespace pgi
