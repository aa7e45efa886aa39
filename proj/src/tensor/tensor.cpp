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

#include "pgi/tensor/tensor.hpp"

#include <algorithm>

namespace pgi {

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ConfigurationError("negative dimension in shape " + to_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (a != b)
    throw ConfigurationError(std::string(what) + ": shape mismatch " + to_string(a) + " vs " +
                             to_string(b));
}

template <typename T>
Tensor<T> slice_batch(const Tensor<T>& t, int begin, int end) {
  if (t.rank() < 1 || begin < 0 || end > t.dim(0) || begin > end)
    throw ParameterError("slice_batch: range out of bounds");
  Shape shape = t.shape();
  shape[0] = end - begin;
  const std::size_t per = t.size() / static_cast<std::size_t>(std::max(1, t.dim(0)));
  std::vector<T> values(t.storage().begin() + static_cast<std::ptrdiff_t>(per * begin),
                        t.storage().begin() + static_cast<std::ptrdiff_t>(per * end));
  return Tensor<T>(std::move(shape), std::move(values));
}

template <typename T>
Tensor<T> concat_batch(std::span<const Tensor<T>> parts) {
  if (parts.empty()) return {};
  Shape shape = parts.front().shape();
  int n = 0;
  std::vector<T> values;
  for (const auto& p : parts) {
    Shape s = p.shape();
    s[0] = shape[0];
    require_same_shape(s, shape, "concat_batch");
    n += p.dim(0);
    values.insert(values.end(), p.storage().begin(), p.storage().end());
  }
  shape[0] = n;
  return Tensor<T>(std::move(shape), std::move(values));
}

template Tensor<float> slice_batch(const Tensor<float>&, int, int);
template Tensor<double> slice_batch(const Tensor<double>&, int, int);
template Tensor<float> concat_batch(std::span<const Tensor<float>>);
template Tensor<double> concat_batch(std::span<const Tensor<double>>);

}  // namespace pgi
