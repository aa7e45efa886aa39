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
#include <string>
#include <vector>

#include "pgi/eval/evaluate.hpp"

namespace pgi {

struct PlotPanel {
  std::string metric;
  /// One polyline per setup, points sorted by mask fraction.
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> lines;
};

struct ModelFigure {
  std::string model;
  std::vector<PlotPanel> panels;  // L1, PSNR, IS, FID
};

/// Groups report rows by model, then by setup, into the four metric panels.
std::vector<ModelFigure> build_figures(const std::vector<MetricsRow>& rows);

/// Renders one PNG per model into `out_dir` (fig_<model>.png) and returns the paths.
std::vector<std::filesystem::path> render_figures(const std::vector<ModelFigure>& figures,
                                                  const std::filesystem::path& out_dir);

}  // namespace pgi
