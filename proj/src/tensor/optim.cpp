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

#include "pgi/tensor/optim.hpp"

#include <cmath>

namespace pgi {

template <typename T>
ag::Var<T> ParamStore<T>::add(const std::string& name, Tensor<T> init) {
  if (vars_.count(name)) throw ConfigurationError("duplicate parameter name " + name);
  names_.push_back(name);
  auto v = ag::Var<T>::leaf(std::move(init), true);
  vars_.emplace(name, v);
  return v;
}

template <typename T>
ag::Var<T> ParamStore<T>::add_normal(const std::string& name, Shape shape, double stddev, Rng& rng) {
  Tensor<T> t(std::move(shape));
  for (auto& x : t.data()) x = static_cast<T>(stddev * rng.normal());
  return add(name, std::move(t));
}

template <typename T>
ag::Var<T> ParamStore<T>::add_constant(const std::string& name, Shape shape, T value) {
  return add(name, Tensor<T>(std::move(shape), value));
}

template <typename T>
ag::Var<T>& ParamStore<T>::operator[](const std::string& name) {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw ConfigurationError("unknown parameter " + name);
  return it->second;
}

template <typename T>
const ag::Var<T>& ParamStore<T>::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw ConfigurationError("unknown parameter " + name);
  return it->second;
}

template <typename T>
std::size_t ParamStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, v] : vars_) n += v.value().size();
  return n;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& [_, v] : vars_) v.zero_grad();
}

template <typename T>
bool ParamStore<T>::all_finite() const {
  for (const auto& [_, v] : vars_)
    for (T x : v.value().data())
      if (!std::isfinite(x)) return false;
  return true;
}

template <typename T>
bool ParamStore<T>::grads_finite() const {
  for (const auto& [_, v] : vars_)
    for (T x : v.grad().data())
      if (!std::isfinite(x)) return false;
  return true;
}

template <typename T>
std::map<std::string, Tensor<T>> ParamStore<T>::snapshot() const {
  std::map<std::string, Tensor<T>> out;
  for (const auto& [name, v] : vars_) out.emplace(name, v.value());
  return out;
}

template <typename T>
void ParamStore<T>::restore(const std::map<std::string, Tensor<T>>& values) {
  for (auto& [name, v] : vars_) {
    auto it = values.find(name);
    if (it == values.end()) throw IntegrityError("missing parameter " + name);
    require_same_shape(it->second.shape(), v.shape(), name.c_str());
    v.mutable_value() = it->second;
  }
}

template <typename T>
Adam<T>::Adam(ParamStore<T>& params, AdamOptions opts) : params_(&params), opts_(opts) {
  for (const auto& name : params.names()) {
    m_.emplace(name, Tensor<T>((*params_)[name].shape()));
    v_.emplace(name, Tensor<T>((*params_)[name].shape()));
  }
}

template <typename T>
void Adam<T>::step() {
  ++steps_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(steps_));
  const T b1 = static_cast<T>(opts_.beta1), b2 = static_cast<T>(opts_.beta2);
  const T step_size = static_cast<T>(opts_.learning_rate / bc1);
  const T inv_bc2 = static_cast<T>(1.0 / bc2);
  const T eps = static_cast<T>(opts_.eps);
  for (const auto& name : params_->names()) {
    auto& p = (*params_)[name];
    const Tensor<T>& g = p.grad();
    if (g.size() != p.value().size()) continue;  // untouched by this loss
    T* w = p.mutable_value().ptr();
    T* m = m_[name].ptr();
    T* v = v_[name].ptr();
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      w[i] -= step_size * m[i] / (std::sqrt(v[i] * inv_bc2) + eps);
    }
  }
}

template <typename T>
std::map<std::string, Tensor<T>> Adam<T>::state() const {
  std::map<std::string, Tensor<T>> out;
  for (const auto& [name, t] : m_) out.emplace(name + ".adam_m", t);
  for (const auto& [name, t] : v_) out.emplace(name + ".adam_v", t);
  return out;
}

template <typename T>
void Adam<T>::load_state(const std::map<std::string, Tensor<T>>& state, long long steps) {
  for (auto& [name, t] : m_) {
    auto it = state.find(name + ".adam_m");
    if (it == state.end()) throw IntegrityError("missing optimizer moment " + name + ".adam_m");
    require_same_shape(it->second.shape(), t.shape(), name.c_str());
    t = it->second;
  }
  for (auto& [name, t] : v_) {
    auto it = state.find(name + ".adam_v");
    if (it == state.end()) throw IntegrityError("missing optimizer moment " + name + ".adam_v");
    require_same_shape(it->second.shape(), t.shape(), name.c_str());
    t = it->second;
  }
  steps_ = steps;
}

template class ParamStore<float>;
template class ParamStore<double>;
template class Adam<float>;
template class Adam<double>;

}  // namespace pgi
