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

#include <nlohmann/json.hpp>

#include "pgi/data/dataset.hpp"
#include "pgi/eval/classifier.hpp"
#include "pgi/nets/generator.hpp"

namespace pgi {

/// Anything that fills holes. Images and output are N×3×H×W in [-1, 1];
/// the mask is N×1×H×W with 1 marking holes.
class InpaintingModel {
 public:
  virtual ~InpaintingModel() = default;
  virtual Tensor<float> inpaint(const Tensor<float>& images, const Tensor<float>& mask) const = 0;
  virtual std::string name() const = 0;
};

/// Debug oracle: returns the ground truth untouched.
class IdentityModel final : public InpaintingModel {
 public:
  Tensor<float> inpaint(const Tensor<float>& images, const Tensor<float>&) const override { return images; }
  std::string name() const override { return "identity"; }
};

class GeneratorModel final : public InpaintingModel {
 public:
  GeneratorModel(std::unique_ptr<Generator<float>> generator, std::string name);
  Tensor<float> inpaint(const Tensor<float>& images, const Tensor<float>& mask) const override;
  std::string name() const override { return name_; }
  const Generator<float>& generator() const { return *generator_; }

 private:
  std::unique_ptr<Generator<float>> generator_;
  std::string name_;
};

struct MetricsRow {
  std::string model;
  std::string setup;
  double mask_fraction = 0;
  double l1 = 0;
  double psnr = 0;
  double is_score = 0;
  double fid = 0;
  long long n_images = 0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
};

inline constexpr const char* kReportHeader = "model,setup,mask_fraction,l1,psnr,is_score,fid,n_images";

void write_report_csv(const MetricsReport& report, const std::filesystem::path& path);
/// Throws ConfigurationError on a missing file, a header other than
/// kReportHeader or a malformed row.
MetricsReport read_report_csv(const std::filesystem::path& path);
nlohmann::json to_json(const MetricsReport& report);

inline constexpr std::uint64_t kEvalSeed = 0xe7a1'2019;

struct EvalOptions {
  int resolution = 64;
  int batch_size = 16;
  ModelFamily mask_family = ModelFamily::custom;
  std::uint64_t seed = kEvalSeed;
  /// Score the composed output (valid pixels from the ground truth) instead
  /// of the raw generator output.
  bool composed = true;
  int is_splits = 1;
  std::string model_label = "custom";
  std::string setup_label = "b";
};

/// Key of the eval mask for image `index` at `fraction`.
std::uint64_t eval_mask_key(std::uint64_t seed, double fraction, std::size_t index);

/// One report row per fraction: deterministic masks, inpaint, then L1,
/// PSNR, IS and FID. `features` may be null, which leaves IS and FID NaN.
MetricsReport evaluate_by_mask_size(const InpaintingModel& model, const DatasetManifest& split,
                                    std::span<const double> fractions, const FeatureModel* features,
                                    const EvalOptions& options);

}  // namespace pgi
