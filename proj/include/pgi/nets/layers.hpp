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

#include <string>

#include "pgi/common/rng.hpp"
#include "pgi/tensor/autograd.hpp"
#include "pgi/tensor/optim.hpp"

namespace pgi {

enum class Activation { identity, elu, leaky_relu, relu, tanh };

template <typename T>
ag::Var<T> activate(const ag::Var<T>& x, Activation act);

/// Std-dev of the zero-mean Gaussian used for every conv weight.
inline constexpr double kConvInitStd = 0.02;

template <typename T>
struct ConvKernel {
  ag::Var<T> weight;  // O×C×k×k
  ag::Var<T> bias;    // O, may be undefined
};

/// activation(conv(x, feature)) ⊙ sigmoid(conv(x, gate)).
/// Both branches share one im2col: the kernels are stacked and the result
/// split along channels.
template <typename T>
ag::Var<T> gated_conv_forward(const ag::Var<T>& input, const ConvKernel<T>& feature, const ConvKernel<T>& gate,
                              Activation activation, ag::Conv2dOptions opts = {});

/// Instance normalization without affine parameters.
template <typename T>
ag::Var<T> instance_normalize(const ag::Var<T>& input, T eps = T(1e-5));

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParamStore<T>& store, const std::string& name, int in, int out, int kernel, ag::Conv2dOptions opts, Rng& rng,
         bool bias = true);
  ag::Var<T> operator()(const ag::Var<T>& x) const { return ag::conv2d(x, k_.weight, k_.bias, opts_); }
  int kernel_size() const { return k_.weight.value().dim(2); }
  const ag::Conv2dOptions& options() const { return opts_; }

 private:
  ConvKernel<T> k_;
  ag::Conv2dOptions opts_;
};

template <typename T>
class GatedConv2d {
 public:
  GatedConv2d() = default;
  GatedConv2d(ParamStore<T>& store, const std::string& name, int in, int out, int kernel, ag::Conv2dOptions opts,
              Activation act, Rng& rng);
  ag::Var<T> operator()(const ag::Var<T>& x) const { return gated_conv_forward(x, feature_, gate_, act_, opts_); }

 private:
  ConvKernel<T> feature_, gate_;
  ag::Conv2dOptions opts_;
  Activation act_ = Activation::elu;
};

template <typename T>
class InstanceNorm {
 public:
  InstanceNorm() = default;
  InstanceNorm(ParamStore<T>& store, const std::string& name, int channels, T eps = T(1e-5));
  ag::Var<T> operator()(const ag::Var<T>& x) const { return ag::instance_norm(x, gamma_, beta_, eps_); }

 private:
  ag::Var<T> gamma_, beta_;
  T eps_ = T(1e-5);
};

}  // namespace pgi
