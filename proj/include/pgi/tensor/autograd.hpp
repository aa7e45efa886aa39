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

// Tape-free reverse-mode autodiff: every op output holds shared pointers to
// its inputs plus a closure that pushes its gradient back into them. The
// graph lives exactly as long as the last Var handle referencing it.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pgi/tensor/tensor.hpp"

namespace pgi::ag {

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  Tensor<T>& grad_buffer() {
    if (grad.size() != value.size()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var constant(Tensor<T> value) { return leaf(std::move(value), false); }
  static Var leaf(Tensor<T> value, bool requires_grad) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return Var(std::move(n));
  }

  bool defined() const noexcept { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Tensor<T>& grad() const { return node_->grad; }
  Tensor<T>& mutable_grad() { return node_->grad_buffer(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape(); }
  T item() const { return node_->value[0]; }
  void zero_grad() {
    if (node_) node_->grad = Tensor<T>();
  }
  const std::shared_ptr<Node<T>>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Accumulates d(root)/d(leaf) into every reachable leaf with requires_grad.
/// `root` must hold a single element.
template <typename T>
void backward(const Var<T>& root);

/// Same value, cut from the graph.
template <typename T>
Var<T> detach(const Var<T>& x);

struct Conv2dOptions {
  int stride = 1;
  int padding = 0;
  int dilation = 1;
};

inline int conv_output_size(int in, int kernel, const Conv2dOptions& o) {
  return (in + 2 * o.padding - o.dilation * (kernel - 1) - 1) / o.stride + 1;
}

/// x: N×C×H×W, weight: O×C×kh×kw, bias: O (may be undefined).
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, Conv2dOptions opts);

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> scale(const Var<T>& a, T factor);
template <typename T> Var<T> add_scalar(const Var<T>& a, T offset);

template <typename T> Var<T> sigmoid(const Var<T>& x);
template <typename T> Var<T> tanh(const Var<T>& x);
template <typename T> Var<T> elu(const Var<T>& x, T alpha = T(1));
template <typename T> Var<T> leaky_relu(const Var<T>& x, T slope);
template <typename T> Var<T> relu(const Var<T>& x);
template <typename T> Var<T> abs(const Var<T>& x);
template <typename T> Var<T> square(const Var<T>& x);
/// log(1 + exp(x)), evaluated stably.
template <typename T> Var<T> softplus(const Var<T>& x);

template <typename T> Var<T> sum(const Var<T>& x);
template <typename T> Var<T> mean(const Var<T>& x);

/// Per (sample, channel) normalization over H×W with biased variance.
/// gamma/beta are per-channel and may be undefined.
template <typename T>
Var<T> instance_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps);

/// Half-pixel-centre bilinear resampling with edge clamping.
template <typename T>
Var<T> resize_bilinear(const Var<T>& x, int out_h, int out_w);

template <typename T>
Var<T> concat_channels(std::span<const Var<T>> parts);
template <typename T>
Var<T> slice_channels(const Var<T>& x, int begin, int end);
/// Concatenates along the leading axis (used to stack weight tensors).
template <typename T>
Var<T> concat_rows(std::span<const Var<T>> parts);

template <typename T> Var<T> global_avg_pool(const Var<T>& x);
/// x: N×D (or N×D×1×1), weight: C×D, bias: C → N×C.
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);
/// Mean negative log-likelihood of `labels` under softmax(logits).
template <typename T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const int> labels);

template <typename T> Var<T> operator+(const Var<T>& a, const Var<T>& b) { return add(a, b); }
template <typename T> Var<T> operator-(const Var<T>& a, const Var<T>& b) { return sub(a, b); }
template <typename T> Var<T> operator*(const Var<T>& a, const Var<T>& b) { return mul(a, b); }

}  // namespace pgi::ag
