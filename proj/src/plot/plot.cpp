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

#include "pgi/plot/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "pgi/common/error.hpp"

namespace pgi {

namespace {

constexpr int kPanelW = 320, kPanelH = 260, kTitleH = 36;
constexpr int kLeft = 58, kRight = 14, kTop = 30, kBottom = 40;

const std::vector<cv::Scalar>& palette() {
  static const std::vector<cv::Scalar> p{{180, 119, 31}, {14, 127, 255}, {44, 160, 44}, {40, 39, 214},
                                         {189, 103, 148}, {75, 86, 140}};
  return p;
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

void draw_panel(cv::Mat& img, int x0, int y0, const PlotPanel& panel) {
  const cv::Scalar ink(40, 40, 40), grid(225, 225, 225);
  const int pw = kPanelW - kLeft - kRight, ph = kPanelH - kTop - kBottom;
  const cv::Point origin(x0 + kLeft, y0 + kTop + ph);

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& [_, pts] : panel.lines)
    for (auto [x, y] : pts) {
      if (!std::isfinite(y)) continue;
      xmin = std::min(xmin, x), xmax = std::max(xmax, x);
      ymin = std::min(ymin, y), ymax = std::max(ymax, y);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 0.5, ymin = 0, ymax = 1;
  if (xmax - xmin < 1e-12) xmin -= 0.05, xmax += 0.05;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.08 * (ymax - ymin);
  ymin -= pad, ymax += pad;

  auto to_px = [&](double x, double y) {
    return cv::Point(origin.x + static_cast<int>(std::lround((x - xmin) / (xmax - xmin) * pw)),
                     origin.y - static_cast<int>(std::lround((y - ymin) / (ymax - ymin) * ph)));
  };

  for (int t = 0; t <= 4; ++t) {
    const double y = ymin + (ymax - ymin) * t / 4;
    const cv::Point p = to_px(xmin, y);
    cv::line(img, p, {p.x + pw, p.y}, grid, 1);
    cv::putText(img, fmt(y), {x0 + 4, p.y + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.35, ink, 1, cv::LINE_AA);
  }
  for (int t = 0; t <= 4; ++t) {
    const double x = xmin + (xmax - xmin) * t / 4;
    const cv::Point p = to_px(x, ymin);
    cv::line(img, p, {p.x, p.y + 4}, ink, 1);
    cv::putText(img, fmt(x), {p.x - 10, p.y + 16}, cv::FONT_HERSHEY_SIMPLEX, 0.35, ink, 1, cv::LINE_AA);
  }
  cv::rectangle(img, {origin.x, origin.y - ph}, {origin.x + pw, origin.y}, ink, 1);
  cv::putText(img, panel.metric, {x0 + kLeft + pw / 2 - 16, y0 + 20}, cv::FONT_HERSHEY_SIMPLEX, 0.55, ink, 1,
              cv::LINE_AA);
  cv::putText(img, "mask fraction", {x0 + kLeft + pw / 2 - 40, y0 + kPanelH - 6}, cv::FONT_HERSHEY_SIMPLEX, 0.38,
              ink, 1, cv::LINE_AA);

  int legend_y = origin.y - ph + 14;
  for (std::size_t l = 0; l < panel.lines.size(); ++l) {
    const auto& [setup, pts] = panel.lines[l];
    const cv::Scalar c = palette()[l % palette().size()];
    std::vector<cv::Point> poly;
    for (auto [x, y] : pts)
      if (std::isfinite(y)) poly.push_back(to_px(x, y));
    if (poly.size() > 1) cv::polylines(img, poly, false, c, 2, cv::LINE_AA);
    for (const auto& p : poly) cv::circle(img, p, 3, c, cv::FILLED, cv::LINE_AA);
    cv::line(img, {origin.x + pw - 70, legend_y - 4}, {origin.x + pw - 52, legend_y - 4}, c, 2);
    cv::putText(img, "setup " + setup, {origin.x + pw - 48, legend_y}, cv::FONT_HERSHEY_SIMPLEX, 0.35, ink, 1,
                cv::LINE_AA);
    legend_y += 14;
  }
}

}  // namespace

std::vector<ModelFigure> build_figures(const std::vector<MetricsRow>& rows) {
  if (rows.empty()) throw ConfigurationError("no report rows to plot");
  std::vector<std::string> models;
  std::map<std::string, std::map<std::string, std::vector<const MetricsRow*>>> grouped;
  for (const auto& r : rows) {
    if (!grouped.count(r.model)) models.push_back(r.model);
    grouped[r.model][r.setup].push_back(&r);
  }
  const char* names[] = {"L1", "PSNR", "IS", "FID"};
  std::vector<ModelFigure> figs;
  for (const auto& model : models) {
    ModelFigure f{model, {}};
    for (int m = 0; m < 4; ++m) {
      PlotPanel p{names[m], {}};
      for (auto& [setup, list] : grouped[model]) {
        std::vector<std::pair<double, double>> pts;
        for (const MetricsRow* r : list) {
          const double v[] = {r->l1, r->psnr, r->is_score, r->fid};
          pts.emplace_back(r->mask_fraction, v[m]);
        }
        std::sort(pts.begin(), pts.end());
        p.lines.emplace_back(setup, std::move(pts));
      }
      f.panels.push_back(std::move(p));
    }
    figs.push_back(std::move(f));
  }
  return figs;
}

std::vector<std::filesystem::path> render_figures(const std::vector<ModelFigure>& figures,
                                                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> paths;
  for (const auto& fig : figures) {
    const int cols = static_cast<int>(fig.panels.size());
    cv::Mat img(kTitleH + kPanelH, kPanelW * cols, CV_8UC3, cv::Scalar(255, 255, 255));
    cv::putText(img, "model: " + fig.model, {10, 24}, cv::FONT_HERSHEY_SIMPLEX, 0.7, cv::Scalar(0, 0, 0), 1,
                cv::LINE_AA);
    for (int c = 0; c < cols; ++c) draw_panel(img, c * kPanelW, kTitleH, fig.panels[static_cast<std::size_t>(c)]);
    std::string safe = fig.model;
    for (char& ch : safe)
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
    const auto path = out_dir / ("fig_" + safe + ".png");
    if (!cv::imwrite(path.string(), img)) throw ConfigurationError("cannot write figure " + path.string());
    paths.push_back(path);
  }
  return paths;
}

}  // namespace pgi
