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

#include "pgi/data/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "pgi/common/error.hpp"

namespace pgi {

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return {};
  cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat bgr;
  try {
    bgr = cv::imdecode(raw, cv::IMREAD_COLOR);
  } catch (const cv::Exception&) {
    return {};
  }
  if (bgr.empty() || bgr.depth() != CV_8U) return {};
  RgbImage img(bgr.rows, bgr.cols);
  for (int r = 0; r < bgr.rows; ++r)
    for (int c = 0; c < bgr.cols; ++c) {
      const auto& px = bgr.at<cv::Vec3b>(r, c);
      std::uint8_t* dst = img.at(r, c);
      dst[0] = px[2];
      dst[1] = px[1];
      dst[2] = px[0];
    }
  return img;
}

RgbImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  RgbImage img = decode_image(bytes);
  if (img.pixels.empty()) throw ConfigurationError("cannot decode image " + path.string());
  return img;
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  cv::Mat bgr(image.height, image.width, CV_8UC3);
  for (int r = 0; r < image.height; ++r)
    for (int c = 0; c < image.width; ++c) {
      const std::uint8_t* src = image.at(r, c);
      bgr.at<cv::Vec3b>(r, c) = cv::Vec3b(src[2], src[1], src[0]);
    }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), bgr)) throw ConfigurationError("cannot write PNG " + path.string());
}

RgbImage center_crop_square(const RgbImage& image) {
  const int side = std::min(image.height, image.width);
  if (side == image.height && side == image.width) return image;
  const int top = (image.height - side) / 2, left = (image.width - side) / 2;
  RgbImage out(side, side);
  for (int r = 0; r < side; ++r)
    std::copy_n(image.at(top + r, left), static_cast<std::size_t>(side) * 3, out.at(r, 0));
  return out;
}

std::vector<double> resize_bilinear_planes(std::span<const double> planes, int channels, int in_h, int in_w, int out_h,
                                           int out_w) {
  struct Tap {
    int i0, i1;
    double w1;
  };
  auto taps = [](int in, int out) {
    std::vector<Tap> t(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / out;
    for (int o = 0; o < out; ++o) {
      double src = std::max(0.0, (o + 0.5) * scale - 0.5);
      const int i0 = std::min(static_cast<int>(src), in - 1);
      t[static_cast<std::size_t>(o)] = {i0, std::min(i0 + 1, in - 1), src - i0};
    }
    return t;
  };
  const auto ty = taps(in_h, out_h), tx = taps(in_w, out_w);
  std::vector<double> out(static_cast<std::size_t>(channels) * out_h * out_w);
  for (int c = 0; c < channels; ++c) {
    const double* src = planes.data() + static_cast<std::size_t>(c) * in_h * in_w;
    double* dst = out.data() + static_cast<std::size_t>(c) * out_h * out_w;
    for (int y = 0; y < out_h; ++y) {
      const Tap& a = ty[static_cast<std::size_t>(y)];
      for (int x = 0; x < out_w; ++x) {
        const Tap& b = tx[static_cast<std::size_t>(x)];
        const double top = (1 - b.w1) * src[a.i0 * in_w + b.i0] + b.w1 * src[a.i0 * in_w + b.i1];
        const double bottom = (1 - b.w1) * src[a.i1 * in_w + b.i0] + b.w1 * src[a.i1 * in_w + b.i1];
        dst[y * out_w + x] = (1 - a.w1) * top + a.w1 * bottom;
      }
    }
  }
  return out;
}

void image_to_tensor(const RgbImage& image, int resolution, Tensor<float>& out, int n) {
  const RgbImage sq = center_crop_square(image);
  const int side = sq.height;
  std::vector<double> planes(static_cast<std::size_t>(3) * side * side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      for (int ch = 0; ch < 3; ++ch)
        planes[(static_cast<std::size_t>(ch) * side + r) * side + c] = sq.at(r, c)[ch];
  const auto resized = resize_bilinear_planes(planes, 3, side, side, resolution, resolution);
  float* dst = out.ptr() + static_cast<std::size_t>(n) * 3 * resolution * resolution;
  for (std::size_t i = 0; i < resized.size(); ++i) dst[i] = static_cast<float>(resized[i] / 127.5 - 1.0);
}

RgbImage tensor_to_image(const Tensor<float>& batch, int n) {
  const int H = batch.dim(2), W = batch.dim(3);
  RgbImage img(H, W);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        const double v = std::round((static_cast<double>(batch.at(n, ch, r, c)) + 1.0) * 127.5);
        img.at(r, c)[ch] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
  return img;
}

}  // namespace pgi
