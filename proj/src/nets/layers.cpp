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

#include "pgi/nets/layers.hpp"

#include <array>

namespace pgi {

template <typename T>
ag::Var<T> activate(const ag::Var<T>& x, Activation act) {
  switch (act) {
    case Activation::identity: return x;
    case Activation::elu: return ag::elu(x, T(1));
    case Activation::leaky_relu: return ag::leaky_relu(x, T(0.2));
    case Activation::relu: return ag::relu(x);
    case Activation::tanh: return ag::tanh(x);
  }
  return x;
}

template <typename T>
ag::Var<T> gated_conv_forward(const ag::Var<T>& input, const ConvKernel<T>& feature, const ConvKernel<T>& gate,
                              Activation activation, ag::Conv2dOptions opts) {
  if (feature.weight.shape() != gate.weight.shape())
    throw ConfigurationError("gated conv: feature kernel " + to_string(feature.weight.shape()) +
                             " and gate kernel " + to_string(gate.weight.shape()) + " differ");
  if (feature.bias.defined() != gate.bias.defined())
    throw ConfigurationError("gated conv: both branches need a bias or neither");
  const int out = feature.weight.value().dim(0);
  const std::array weights{feature.weight, gate.weight};
  ag::Var<T> bias;
  if (feature.bias.defined()) {
    const std::array biases{feature.bias, gate.bias};
    bias = ag::concat_rows<T>(biases);
  }
  auto both = ag::conv2d(input, ag::concat_rows<T>(weights), bias, opts);
  auto f = activate(ag::slice_channels(both, 0, out), activation);
  auto g = ag::sigmoid(ag::slice_channels(both, out, 2 * out));
  return ag::mul(f, g);
}

template <typename T>
ag::Var<T> instance_normalize(const ag::Var<T>& input, T eps) {
  return ag::instance_norm(input, ag::Var<T>(), ag::Var<T>(), eps);
}

template <typename T>
Conv2d<T>::Conv2d(ParamStore<T>& store, const std::string& name, int in, int out, int kernel,
                  ag::Conv2dOptions opts, Rng& rng, bool bias)
    : opts_(opts) {
  k_.weight = store.add_normal(name + ".w", {out, in, kernel, kernel}, kConvInitStd, rng);
  if (bias) k_.bias = store.add_constant(name + ".b", {out}, T(0));
}

template <typename T>
GatedConv2d<T>::GatedConv2d(ParamStore<T>& store, const std::string& name, int in, int out, int kernel,
                            ag::Conv2dOptions opts, Activation act, Rng& rng)
    : opts_(opts), act_(act) {
  feature_.weight = store.add_normal(name + ".feature.w", {out, in, kernel, kernel}, kConvInitStd, rng);
  feature_.bias = store.add_constant(name + ".feature.b", {out}, T(0));
  gate_.weight = store.add_normal(name + ".gate.w", {out, in, kernel, kernel}, kConvInitStd, rng);
  gate_.bias = store.add_constant(name + ".gate.b", {out}, T(0));
}

template <typename T>
InstanceNorm<T>::InstanceNorm(ParamStore<T>& store, const std::string& name, int channels, T eps) : eps_(eps) {
  gamma_ = store.add_constant(name + ".gamma", {channels}, T(1));
  beta_ = store.add_constant(name + ".beta", {channels}, T(0));
}

#define PGI_INSTANTIATE_LAYERS(T)                                                                          \
  template ag::Var<T> activate(const ag::Var<T>&, Activation);                                             \
  template ag::Var<T> gated_conv_forward(const ag::Var<T>&, const ConvKernel<T>&, const ConvKernel<T>&,    \
                                         Activation, ag::Conv2dOptions);                                   \
  template ag::Var<T> instance_normalize(const ag::Var<T>&, T);                                            \
  template class Conv2d<T>;                                                                                \
  template class GatedConv2d<T>;                                                                           \
  template class InstanceNorm<T>;

PGI_INSTANTIATE_LAYERS(float)
PGI_INSTANTIATE_LAYERS(double)

}  // namespace pgi
