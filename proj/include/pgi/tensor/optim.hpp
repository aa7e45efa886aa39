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

#include <map>
#include <string>
#include <vector>

#include "pgi/common/rng.hpp"
#include "pgi/tensor/autograd.hpp"

namespace pgi {

/// Ordered collection of named trainable leaves. Names are hierarchical
/// ("enc.0.feature.w") and define the checkpoint layout.
template <typename T>
class ParamStore {
 public:
  ag::Var<T> add(const std::string& name, Tensor<T> init);
  /// Zero-mean Gaussian init.
  ag::Var<T> add_normal(const std::string& name, Shape shape, double stddev, Rng& rng);
  ag::Var<T> add_constant(const std::string& name, Shape shape, T value);

  const std::vector<std::string>& names() const noexcept { return names_; }
  ag::Var<T>& operator[](const std::string& name);
  const ag::Var<T>& operator[](const std::string& name) const;
  std::size_t size() const noexcept { return names_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  bool all_finite() const;
  bool grads_finite() const;

  /// name → value snapshot
  std::map<std::string, Tensor<T>> snapshot() const;
  /// Overwrites values; every stored name must be present with matching shape.
  void restore(const std::map<std::string, Tensor<T>>& values);

 private:
  std::vector<std::string> names_;
  std::map<std::string, ag::Var<T>> vars_;
};

struct AdamOptions {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moments are keyed by parameter name so they
/// serialize next to the parameters.
template <typename T>
class Adam {
 public:
  Adam(ParamStore<T>& params, AdamOptions opts);

  void step();
  const AdamOptions& options() const noexcept { return opts_; }
  void set_learning_rate(double lr) { opts_.learning_rate = lr; }
  long long steps() const noexcept { return steps_; }

  std::map<std::string, Tensor<T>> state() const;
  void load_state(const std::map<std::string, Tensor<T>>& state, long long steps);

 private:
  ParamStore<T>* params_;
  AdamOptions opts_;
  long long steps_ = 0;
  std::map<std::string, Tensor<T>> m_, v_;
};

}  // namespace pgi
