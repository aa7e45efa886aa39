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

#include "pgi/mask_engine/mask_io.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <sstream>

#include "pgi/common/error.hpp"

namespace pgi {

void write_mask_png(const Mask& mask, const std::filesystem::path& path) {
  cv::Mat img(mask.height, mask.width, CV_8UC1);
  for (int r = 0; r < mask.height; ++r)
    for (int c = 0; c < mask.width; ++c) img.at<std::uint8_t>(r, c) = mask.at(r, c) ? 255 : 0;
  if (!cv::imwrite(path.string(), img)) throw ConfigurationError("cannot write mask PNG " + path.string());
}

Mask read_mask_png(const std::filesystem::path& path) {
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw ConfigurationError("cannot decode mask image " + path.string());
  Mask m(img.rows, img.cols);
  m.spec_id = "file:" + path.filename().string();
  for (int r = 0; r < img.rows; ++r)
    for (int c = 0; c < img.cols; ++c) m.at(r, c) = img.at<std::uint8_t>(r, c) ? 1 : 0;
  return m;
}

std::string encode_mask_rle(const Mask& mask) {
  std::ostringstream out;
  out << mask.height << ' ' << mask.width << ';';
  std::uint8_t current = 0;
  std::size_t run = 0;
  for (std::uint8_t v : mask.grid) {
    if (v == current) {
      ++run;
    } else {
      out << ' ' << run;
      current = v;
      run = 1;
    }
  }
  out << ' ' << run;
  return out.str();
}

Mask decode_mask_rle(const std::string& text) {
  const auto semi = text.find(';');
  if (semi == std::string::npos) throw ParameterError("RLE mask: missing ';' after dimensions");
  std::istringstream head(text.substr(0, semi));
  int h = 0, w = 0;
  if (!(head >> h >> w) || h <= 0 || w <= 0) throw ParameterError("RLE mask: bad dimensions");
  Mask m(h, w);
  m.spec_id = "rle";
  std::istringstream runs(text.substr(semi + 1));
  std::size_t pos = 0, run = 0;
  std::uint8_t value = 0;
  while (runs >> run) {
    if (pos + run > m.grid.size()) throw ParameterError("RLE mask: runs exceed H×W");
    std::fill_n(m.grid.begin() + static_cast<std::ptrdiff_t>(pos), run, value);
    pos += run;
    value ^= 1;
  }
  if (!runs.eof()) throw ParameterError("RLE mask: non-numeric run");
  if (pos != m.grid.size()) throw ParameterError("RLE mask: runs cover " + std::to_string(pos) + " of " +
                                                 std::to_string(m.grid.size()) + " pixels");
  return m;
}

}  // namespace pgi
