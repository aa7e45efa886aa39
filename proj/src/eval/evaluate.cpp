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

#include "pgi/eval/evaluate.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pgi/common/error.hpp"
#include "pgi/common/rng.hpp"
#include "pgi/eval/metrics.hpp"
#include "pgi/mask_engine/schedule.hpp"

namespace pgi {

GeneratorModel::GeneratorModel(std::unique_ptr<Generator<float>> generator, std::string name)
    : generator_(std::move(generator)), name_(std::move(name)) {
  if (!generator_) throw ParameterError("GeneratorModel needs a generator");
}

Tensor<float> GeneratorModel::inpaint(const Tensor<float>& images, const Tensor<float>& mask) const {
  using V = ag::Var<float>;
  return generator_->forward(V::constant(apply_holes(images, mask)), V::constant(mask)).output.value();
}

std::uint64_t eval_mask_key(std::uint64_t seed, double fraction, std::size_t index) {
  return derive_key(seed, {stream::kEval, std::bit_cast<std::uint64_t>(fraction), static_cast<std::uint64_t>(index)});
}

void write_report_csv(const MetricsReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write report " + path.string());
  out << kReportHeader << '\n';
  char buf[512];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.6g,%.9g,%.9g,%.9g,%.9g,%lld", r.model.c_str(), r.setup.c_str(),
                  r.mask_fraction, r.l1, r.psnr, r.is_score, r.fid, r.n_images);
    out << buf << '\n';
  }
}

MetricsReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open report " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigurationError("report " + path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kReportHeader)
    throw ConfigurationError("report " + path.string() + " has header '" + line + "', expected '" + kReportHeader +
                             "'");
  MetricsReport report;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw ConfigurationError(path.string() + ":" + std::to_string(lineno) + ": expected 8 fields");
    try {
      report.rows.push_back({f[0], f[1], std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]),
                             std::stod(f[6]), std::stoll(f[7])});
    } catch (const std::exception&) {
      throw ConfigurationError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  if (report.rows.empty()) throw ConfigurationError("report " + path.string() + " has no rows");
  return report;
}

nlohmann::json to_json(const MetricsReport& report) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"model", r.model},
                    {"setup", r.setup},
                    {"mask_fraction", r.mask_fraction},
                    {"l1", num(r.l1)},
                    {"psnr", num(r.psnr)},
                    {"is_score", num(r.is_score)},
                    {"fid", num(r.fid)},
                    {"n_images", r.n_images}});
  return {{"rows", rows}};
}

MetricsReport evaluate_by_mask_size(const InpaintingModel& model, const DatasetManifest& split,
                                    std::span<const double> fractions, const FeatureModel* features,
                                    const EvalOptions& options) {
  if (split.size() == 0) throw ConfigurationError("evaluation split is empty");
  if (options.batch_size < 1) throw ParameterError("eval batch_size must be >= 1");
  for (double f : fractions)
    if (!(f >= 0 && f <= 0.5)) throw ParameterError("eval fraction " + std::to_string(f) + " outside [0, 0.5]");

  const std::size_t n = split.size();
  const int R = options.resolution;
  // Ground truth is shared by every fraction, so decode it once.
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const Tensor<float> truth = load_batch(split, all, R);
  const std::size_t per = static_cast<std::size_t>(3) * R * R;
  ClassifierOutputs real_out;
  if (features) real_out = features->run(truth);

  MetricsReport report;
  for (double fraction : fractions) {
    Tensor<float> pred({static_cast<int>(n), 3, R, R});
    for (std::size_t lo = 0; lo < n; lo += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t hi = std::min(n, lo + static_cast<std::size_t>(options.batch_size));
      const int b = static_cast<int>(hi - lo);
      Tensor<float> gt({b, 3, R, R});
      std::copy_n(truth.ptr() + lo * per, static_cast<std::size_t>(b) * per, gt.ptr());
      std::vector<Mask> masks;
      for (std::size_t i = lo; i < hi; ++i)
        masks.push_back(mask_for_fraction(fraction, R, options.mask_family, eval_mask_key(options.seed, fraction, i)));
      const Tensor<float> m = masks_to_tensor<float>(masks);
      Tensor<float> out = model.inpaint(gt, m);
      require_same_shape(out.shape(), gt.shape(), "inpainting output");
      if (options.composed)
        out = compose_output(ag::Var<float>::constant(out), ag::Var<float>::constant(gt), m).value();
      std::copy_n(out.ptr(), out.size(), pred.ptr() + lo * per);
    }
    const Tensor<double> ref = to_metric_space(truth), got = to_metric_space(pred);
    MetricsRow row{options.model_label, options.setup_label, fraction, l1_metric(ref, got), mean_psnr(ref, got),
                   NAN, NAN, static_cast<long long>(n)};
    if (features) {
      const ClassifierOutputs fake_out = features->run(pred);
      row.is_score = inception_score(fake_out.probabilities, options.is_splits);
      row.fid = fid(real_out.features, fake_out.features);
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace pgi
