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

#include "pgi/tensor/autograd.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace pgi::ag {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using Fn = std::function<void(Node<T>&)>;

template <typename T>
Var<T> make_op(Tensor<T> value, std::initializer_list<Var<T>> inputs, Fn<T> fn) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  for (const auto& in : inputs) {
    if (in.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    for (const auto& in : inputs) node->inputs.push_back(in.node());
    node->backward = std::move(fn);
  }
  return Var<T>(std::move(node));
}

template <typename T>
Var<T> make_op(Tensor<T> value, const std::vector<Var<T>>& inputs, Fn<T> fn) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  for (const auto& in : inputs) {
    if (in.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    for (const auto& in : inputs) node->inputs.push_back(in.node());
    node->backward = std::move(fn);
  }
  return Var<T>(std::move(node));
}

// Gradient sink for input i, or nullptr when that input needs no gradient.
template <typename T>
T* sink(Node<T>& self, std::size_t i) {
  auto& in = self.inputs[i];
  if (!in || !in->requires_grad) return nullptr;
  return in->grad_buffer().ptr();
}

template <typename T, typename F, typename D>
Var<T> unary(const Var<T>& x, F f, D df) {
  Tensor<T> out(x.shape());
  const T* xv = x.value().ptr();
  T* o = out.ptr();
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) o[i] = f(xv[i]);
  return make_op<T>(std::move(out), {x}, [df, n](Node<T>& self) {
    T* gx = sink(self, 0);
    if (!gx) return;
    const T* xv = self.inputs[0]->value.ptr();
    const T* y = self.value.ptr();
    const T* g = self.grad.ptr();
    for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * df(xv[i], y[i]);
  });
}

void require_rank4(const Shape& s, const char* what) {
  if (s.size() != 4) throw ConfigurationError(std::string(what) + ": expected NCHW, got " + to_string(s));
}

}  // namespace

template <typename T>
void backward(const Var<T>& root) {
  if (!root.defined() || root.value().size() != 1)
    throw ConfigurationError("backward: root must be a scalar");
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (inputs before users).
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{root.node().get(), 0}};
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child && child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root.node()->grad_buffer()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward && n->grad.size() == n->value.size()) n->backward(*n);
  }
}

template <typename T>
Var<T> detach(const Var<T>& x) {
  return Var<T>::constant(x.value());
}

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, Conv2dOptions opts) {
  require_rank4(x.shape(), "conv2d input");
  require_rank4(weight.shape(), "conv2d weight");
  const int N = x.value().dim(0), C = x.value().dim(1), H = x.value().dim(2), W = x.value().dim(3);
  const int O = weight.value().dim(0), kh = weight.value().dim(2), kw = weight.value().dim(3);
  if (weight.value().dim(1) != C)
    throw ConfigurationError("conv2d: weight " + to_string(weight.shape()) + " incompatible with input " +
                             to_string(x.shape()));
  if (bias.defined() && bias.value().size() != static_cast<std::size_t>(O))
    throw ConfigurationError("conv2d: bias size does not match output channels");
  if (opts.stride < 1 || opts.dilation < 1 || opts.padding < 0)
    throw ConfigurationError("conv2d: invalid stride/padding/dilation");
  const int Ho = conv_output_size(H, kh, opts), Wo = conv_output_size(W, kw, opts);
  if (Ho <= 0 || Wo <= 0) throw ConfigurationError("conv2d: input " + to_string(x.shape()) + " too small for kernel");

  const int K = C * kh * kw;
  const int HWo = Ho * Wo;
  const int cols = N * HWo;
  auto col = std::make_shared<std::vector<T>>(static_cast<std::size_t>(K) * cols);
  const T* xv = x.value().ptr();
  // im2col: row r = (c, ki, kj), column = (n, oh, ow)
  for (int c = 0; c < C; ++c)
    for (int ki = 0; ki < kh; ++ki)
      for (int kj = 0; kj < kw; ++kj) {
        T* row = col->data() + static_cast<std::size_t>((c * kh + ki) * kw + kj) * cols;
        for (int n = 0; n < N; ++n) {
          const T* plane = xv + (static_cast<std::size_t>(n) * C + c) * H * W;
          T* dst = row + static_cast<std::size_t>(n) * HWo;
          for (int oh = 0; oh < Ho; ++oh) {
            const int ih = oh * opts.stride - opts.padding + ki * opts.dilation;
            T* d = dst + oh * Wo;
            if (ih < 0 || ih >= H) {
              std::fill(d, d + Wo, T(0));
              continue;
            }
            const T* src = plane + static_cast<std::size_t>(ih) * W;
            for (int ow = 0; ow < Wo; ++ow) {
              const int iw = ow * opts.stride - opts.padding + kj * opts.dilation;
              d[ow] = (iw >= 0 && iw < W) ? src[iw] : T(0);
            }
          }
        }
      }

  Eigen::Map<const RowMat<T>> wm(weight.value().ptr(), O, K);
  Eigen::Map<const RowMat<T>> cm(col->data(), K, cols);
  RowMat<T> y(O, cols);
  y.noalias() = wm * cm;

  Tensor<T> out({N, O, Ho, Wo});
  for (int n = 0; n < N; ++n)
    for (int o = 0; o < O; ++o) {
      const T b = bias.defined() ? bias.value()[o] : T(0);
      const T* src = y.data() + static_cast<std::size_t>(o) * cols + static_cast<std::size_t>(n) * HWo;
      T* dst = out.ptr() + (static_cast<std::size_t>(n) * O + o) * HWo;
      for (int i = 0; i < HWo; ++i) dst[i] = src[i] + b;
    }

  std::vector<Var<T>> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_op<T>(std::move(out), inputs, [=](Node<T>& self) {
    RowMat<T> dy(O, cols);
    const T* g = self.grad.ptr();
    for (int n = 0; n < N; ++n)
      for (int o = 0; o < O; ++o) {
        const T* src = g + (static_cast<std::size_t>(n) * O + o) * HWo;
        std::copy(src, src + HWo, dy.data() + static_cast<std::size_t>(o) * cols + static_cast<std::size_t>(n) * HWo);
      }
    Eigen::Map<const RowMat<T>> cmat(col->data(), K, cols);
    if (T* gw = sink(self, 1)) {
      Eigen::Map<RowMat<T>> gwm(gw, O, K);
      gwm.noalias() += dy * cmat.transpose();
    }
    if (self.inputs.size() > 2) {
      if (T* gb = sink(self, 2)) {
        for (int o = 0; o < O; ++o) gb[o] += dy.row(o).sum();
      }
    }
    if (T* gx = sink(self, 0)) {
      Eigen::Map<const RowMat<T>> wmat(self.inputs[1]->value.ptr(), O, K);
      RowMat<T> dcol(K, cols);
      dcol.noalias() = wmat.transpose() * dy;
      for (int c = 0; c < C; ++c)
        for (int ki = 0; ki < kh; ++ki)
          for (int kj = 0; kj < kw; ++kj) {
            const T* row = dcol.data() + static_cast<std::size_t>((c * kh + ki) * kw + kj) * cols;
            for (int n = 0; n < N; ++n) {
              T* plane = gx + (static_cast<std::size_t>(n) * C + c) * H * W;
              const T* srcn = row + static_cast<std::size_t>(n) * HWo;
              for (int oh = 0; oh < Ho; ++oh) {
                const int ih = oh * opts.stride - opts.padding + ki * opts.dilation;
                if (ih < 0 || ih >= H) continue;
                T* dst = plane + static_cast<std::size_t>(ih) * W;
                const T* s = srcn + oh * Wo;
                for (int ow = 0; ow < Wo; ++ow) {
                  const int iw = ow * opts.stride - opts.padding + kj * opts.dilation;
                  if (iw >= 0 && iw < W) dst[iw] += s[ow];
                }
              }
            }
          }
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Tensor<T> out(a.shape());
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = a.value()[i] + b.value()[i];
  return make_op<T>(std::move(out), {a, b}, [n](Node<T>& self) {
    const T* g = self.grad.ptr();
    if (T* ga = sink(self, 0))
      for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
    if (T* gb = sink(self, 1))
      for (std::size_t i = 0; i < n; ++i) gb[i] += g[i];
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  Tensor<T> out(a.shape());
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = a.value()[i] - b.value()[i];
  return make_op<T>(std::move(out), {a, b}, [n](Node<T>& self) {
    const T* g = self.grad.ptr();
    if (T* ga = sink(self, 0))
      for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
    if (T* gb = sink(self, 1))
      for (std::size_t i = 0; i < n; ++i) gb[i] -= g[i];
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  Tensor<T> out(a.shape());
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = a.value()[i] * b.value()[i];
  return make_op<T>(std::move(out), {a, b}, [n](Node<T>& self) {
    const T* g = self.grad.ptr();
    const T* av = self.inputs[0]->value.ptr();
    const T* bv = self.inputs[1]->value.ptr();
    if (T* ga = sink(self, 0))
      for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * bv[i];
    if (T* gb = sink(self, 1))
      for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * av[i];
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  return unary(a, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Var<T> add_scalar(const Var<T>& a, T offset) {
  return unary(a, [offset](T v) { return v + offset; }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  return unary(
      x,
      [](T v) {
        if (v >= 0) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> tanh(const Var<T>& x) {
  return unary(x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Var<T> elu(const Var<T>& x, T alpha) {
  return unary(
      x, [alpha](T v) { return v > 0 ? v : alpha * std::expm1(v); },
      [alpha](T v, T y) { return v > 0 ? T(1) : y + alpha; });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& x, T slope) {
  return unary(x, [slope](T v) { return v > 0 ? v : slope * v; },
               [slope](T v, T) { return v > 0 ? T(1) : slope; });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  return unary(x, [](T v) { return v > 0 ? v : T(0); }, [](T v, T) { return v > 0 ? T(1) : T(0); });
}

template <typename T>
Var<T> abs(const Var<T>& x) {
  return unary(x, [](T v) { return std::abs(v); },
               [](T v, T) { return v > 0 ? T(1) : (v < 0 ? T(-1) : T(0)); });
}

template <typename T>
Var<T> square(const Var<T>& x) {
  return unary(x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Var<T> softplus(const Var<T>& x) {
  return unary(
      x, [](T v) { return std::max(v, T(0)) + std::log1p(std::exp(-std::abs(v))); },
      [](T v, T) {
        if (v >= 0) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T total = 0;
  for (T v : x.value().data()) total += v;
  const std::size_t n = x.value().size();
  return make_op<T>(Tensor<T>({1}, total), {x}, [n](Node<T>& self) {
    T* gx = sink(self, 0);
    if (!gx) return;
    const T g = self.grad[0];
    for (std::size_t i = 0; i < n; ++i) gx[i] += g;
  });
}

template <typename T>
Var<T> mean(const Var<T>& x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw ParameterError("mean of empty tensor");
  return scale(sum(x), T(1) / static_cast<T>(n));
}

template <typename T>
Var<T> instance_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
  require_rank4(x.shape(), "instance_norm");
  const int N = x.value().dim(0), C = x.value().dim(1);
  const int M = x.value().dim(2) * x.value().dim(3);
  if (gamma.defined() && gamma.value().size() != static_cast<std::size_t>(C))
    throw ConfigurationError("instance_norm: gamma size mismatch");
  if (beta.defined() && beta.value().size() != static_cast<std::size_t>(C))
    throw ConfigurationError("instance_norm: beta size mismatch");
  auto xhat = std::make_shared<std::vector<T>>(x.value().size());
  auto inv_std = std::make_shared<std::vector<T>>(static_cast<std::size_t>(N) * C);
  Tensor<T> out(x.shape());
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c) {
      const std::size_t base = (static_cast<std::size_t>(n) * C + c) * M;
      const T* xv = x.value().ptr() + base;
      T mu = 0;
      for (int i = 0; i < M; ++i) mu += xv[i];
      mu /= static_cast<T>(M);
      T var = 0;
      for (int i = 0; i < M; ++i) var += (xv[i] - mu) * (xv[i] - mu);
      var /= static_cast<T>(M);
      const T is = T(1) / std::sqrt(var + eps);
      (*inv_std)[static_cast<std::size_t>(n) * C + c] = is;
      const T gm = gamma.defined() ? gamma.value()[c] : T(1);
      const T bt = beta.defined() ? beta.value()[c] : T(0);
      for (int i = 0; i < M; ++i) {
        const T h = (xv[i] - mu) * is;
        (*xhat)[base + i] = h;
        out[base + i] = gm * h + bt;
      }
    }
  const bool has_gamma = gamma.defined(), has_beta = beta.defined();
  std::vector<Var<T>> inputs{x};
  if (has_gamma) inputs.push_back(gamma);
  if (has_beta) inputs.push_back(beta);
  return make_op<T>(std::move(out), inputs, [=](Node<T>& self) {
    const T* g = self.grad.ptr();
    T* gx = sink(self, 0);
    T* gg = has_gamma ? sink(self, 1) : nullptr;
    T* gbeta = has_beta ? sink(self, has_gamma ? 2 : 1) : nullptr;
    const T* gmv = has_gamma ? self.inputs[1]->value.ptr() : nullptr;
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        const std::size_t base = (static_cast<std::size_t>(n) * C + c) * M;
        const T gm = gmv ? gmv[c] : T(1);
        T sum_dy = 0, sum_dy_xhat = 0;
        for (int i = 0; i < M; ++i) {
          sum_dy += g[base + i];
          sum_dy_xhat += g[base + i] * (*xhat)[base + i];
        }
        if (gg) gg[c] += sum_dy_xhat;
        if (gbeta) gbeta[c] += sum_dy;
        if (gx) {
          const T is = (*inv_std)[static_cast<std::size_t>(n) * C + c];
          const T k = gm * is / static_cast<T>(M);
          for (int i = 0; i < M; ++i)
            gx[base + i] += k * (static_cast<T>(M) * g[base + i] - sum_dy - (*xhat)[base + i] * sum_dy_xhat);
        }
      }
  });
}

namespace {
struct Tap {
  int i0, i1;
  double w1;  // weight of i1; i0 gets 1 - w1
};

std::vector<Tap> bilinear_taps(int in, int out) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    if (src < 0) src = 0;
    int i0 = static_cast<int>(src);
    if (i0 > in - 1) i0 = in - 1;
    const int i1 = i0 < in - 1 ? i0 + 1 : i0;
    taps[static_cast<std::size_t>(o)] = {i0, i1, src - i0};
  }
  return taps;
}
}  // namespace

template <typename T>
Var<T> resize_bilinear(const Var<T>& x, int out_h, int out_w) {
  require_rank4(x.shape(), "resize_bilinear");
  if (out_h < 1 || out_w < 1) throw ConfigurationError("resize_bilinear: empty output");
  const int N = x.value().dim(0), C = x.value().dim(1), H = x.value().dim(2), W = x.value().dim(3);
  const auto ty = bilinear_taps(H, out_h);
  const auto tx = bilinear_taps(W, out_w);
  Tensor<T> out({N, C, out_h, out_w});
  for (int p = 0; p < N * C; ++p) {
    const T* src = x.value().ptr() + static_cast<std::size_t>(p) * H * W;
    T* dst = out.ptr() + static_cast<std::size_t>(p) * out_h * out_w;
    for (int oy = 0; oy < out_h; ++oy) {
      const auto& a = ty[static_cast<std::size_t>(oy)];
      const T wy1 = static_cast<T>(a.w1), wy0 = T(1) - wy1;
      for (int ox = 0; ox < out_w; ++ox) {
        const auto& b = tx[static_cast<std::size_t>(ox)];
        const T wx1 = static_cast<T>(b.w1), wx0 = T(1) - wx1;
        dst[oy * out_w + ox] = wy0 * (wx0 * src[a.i0 * W + b.i0] + wx1 * src[a.i0 * W + b.i1]) +
                               wy1 * (wx0 * src[a.i1 * W + b.i0] + wx1 * src[a.i1 * W + b.i1]);
      }
    }
  }
  return make_op<T>(std::move(out), {x}, [=](Node<T>& self) {
    T* gx = sink(self, 0);
    if (!gx) return;
    for (int p = 0; p < N * C; ++p) {
      const T* g = self.grad.ptr() + static_cast<std::size_t>(p) * out_h * out_w;
      T* d = gx + static_cast<std::size_t>(p) * H * W;
      for (int oy = 0; oy < out_h; ++oy) {
        const auto& a = ty[static_cast<std::size_t>(oy)];
        const T wy1 = static_cast<T>(a.w1), wy0 = T(1) - wy1;
        for (int ox = 0; ox < out_w; ++ox) {
          const auto& b = tx[static_cast<std::size_t>(ox)];
          const T wx1 = static_cast<T>(b.w1), wx0 = T(1) - wx1;
          const T v = g[oy * out_w + ox];
          d[a.i0 * W + b.i0] += v * wy0 * wx0;
          d[a.i0 * W + b.i1] += v * wy0 * wx1;
          d[a.i1 * W + b.i0] += v * wy1 * wx0;
          d[a.i1 * W + b.i1] += v * wy1 * wx1;
        }
      }
    }
  });
}

template <typename T>
Var<T> concat_channels(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ConfigurationError("concat_channels: no inputs");
  for (const auto& p : parts) require_rank4(p.shape(), "concat_channels");
  const int N = parts[0].value().dim(0), H = parts[0].value().dim(2), W = parts[0].value().dim(3);
  std::vector<int> offsets;
  int C = 0;
  for (const auto& p : parts) {
    if (p.value().dim(0) != N || p.value().dim(2) != H || p.value().dim(3) != W)
      throw ConfigurationError("concat_channels: shape mismatch " + to_string(parts[0].shape()) + " vs " +
                               to_string(p.shape()));
    offsets.push_back(C);
    C += p.value().dim(1);
  }
  const std::size_t M = static_cast<std::size_t>(H) * W;
  Tensor<T> out({N, C, H, W});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const int Ck = parts[k].value().dim(1);
    for (int n = 0; n < N; ++n) {
      const T* src = parts[k].value().ptr() + static_cast<std::size_t>(n) * Ck * M;
      std::copy(src, src + Ck * M, out.ptr() + (static_cast<std::size_t>(n) * C + offsets[k]) * M);
    }
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return make_op<T>(std::move(out), inputs, [=](Node<T>& self) {
    for (std::size_t k = 0; k < self.inputs.size(); ++k) {
      T* gk = sink(self, k);
      if (!gk) continue;
      const int Ck = self.inputs[k]->value.dim(1);
      for (int n = 0; n < N; ++n) {
        const T* src = self.grad.ptr() + (static_cast<std::size_t>(n) * C + offsets[k]) * M;
        T* dst = gk + static_cast<std::size_t>(n) * Ck * M;
        for (std::size_t i = 0; i < Ck * M; ++i) dst[i] += src[i];
      }
    }
  });
}

template <typename T>
Var<T> slice_channels(const Var<T>& x, int begin, int end) {
  require_rank4(x.shape(), "slice_channels");
  const int N = x.value().dim(0), C = x.value().dim(1);
  if (begin < 0 || end > C || begin >= end) throw ConfigurationError("slice_channels: bad range");
  const std::size_t M = static_cast<std::size_t>(x.value().dim(2)) * x.value().dim(3);
  const int Cs = end - begin;
  Tensor<T> out({N, Cs, x.value().dim(2), x.value().dim(3)});
  for (int n = 0; n < N; ++n) {
    const T* src = x.value().ptr() + (static_cast<std::size_t>(n) * C + begin) * M;
    std::copy(src, src + Cs * M, out.ptr() + static_cast<std::size_t>(n) * Cs * M);
  }
  return make_op<T>(std::move(out), {x}, [=](Node<T>& self) {
    T* gx = sink(self, 0);
    if (!gx) return;
    for (int n = 0; n < N; ++n) {
      const T* src = self.grad.ptr() + static_cast<std::size_t>(n) * Cs * M;
      T* dst = gx + (static_cast<std::size_t>(n) * C + begin) * M;
      for (std::size_t i = 0; i < Cs * M; ++i) dst[i] += src[i];
    }
  });
}

template <typename T>
Var<T> concat_rows(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ConfigurationError("concat_rows: no inputs");
  Shape shape = parts[0].shape();
  int rows = 0;
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& p : parts) {
    Shape s = p.shape();
    s[0] = shape[0];
    require_same_shape(s, shape, "concat_rows");
    rows += p.value().dim(0);
    offsets.push_back(total);
    total += p.value().size();
  }
  shape[0] = rows;
  Tensor<T> out(shape);
  for (std::size_t k = 0; k < parts.size(); ++k)
    std::copy(parts[k].value().ptr(), parts[k].value().ptr() + parts[k].value().size(), out.ptr() + offsets[k]);
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return make_op<T>(std::move(out), inputs, [offsets](Node<T>& self) {
    for (std::size_t k = 0; k < self.inputs.size(); ++k) {
      T* gk = sink(self, k);
      if (!gk) continue;
      const std::size_t n = self.inputs[k]->value.size();
      const T* src = self.grad.ptr() + offsets[k];
      for (std::size_t i = 0; i < n; ++i) gk[i] += src[i];
    }
  });
}

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  require_rank4(x.shape(), "global_avg_pool");
  const int N = x.value().dim(0), C = x.value().dim(1);
  const std::size_t M = static_cast<std::size_t>(x.value().dim(2)) * x.value().dim(3);
  Tensor<T> out({N, C, 1, 1});
  for (int p = 0; p < N * C; ++p) {
    T s = 0;
    const T* src = x.value().ptr() + p * M;
    for (std::size_t i = 0; i < M; ++i) s += src[i];
    out[static_cast<std::size_t>(p)] = s / static_cast<T>(M);
  }
  return make_op<T>(std::move(out), {x}, [=](Node<T>& self) {
    T* gx = sink(self, 0);
    if (!gx) return;
    for (int p = 0; p < N * C; ++p) {
      const T g = self.grad[static_cast<std::size_t>(p)] / static_cast<T>(M);
      T* dst = gx + p * M;
      for (std::size_t i = 0; i < M; ++i) dst[i] += g;
    }
  });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  const int N = x.value().dim(0);
  const int D = static_cast<int>(x.value().size() / static_cast<std::size_t>(N));
  if (weight.value().rank() != 2 || weight.value().dim(1) != D)
    throw ConfigurationError("linear: weight " + to_string(weight.shape()) + " incompatible with input " +
                             to_string(x.shape()));
  const int C = weight.value().dim(0);
  Eigen::Map<const RowMat<T>> xm(x.value().ptr(), N, D);
  Eigen::Map<const RowMat<T>> wm(weight.value().ptr(), C, D);
  Tensor<T> out({N, C});
  Eigen::Map<RowMat<T>> om(out.ptr(), N, C);
  om.noalias() = xm * wm.transpose();
  if (bias.defined())
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) om(n, c) += bias.value()[c];
  std::vector<Var<T>> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_op<T>(std::move(out), inputs, [=](Node<T>& self) {
    Eigen::Map<const RowMat<T>> g(self.grad.ptr(), N, C);
    if (T* gx = sink(self, 0)) {
      Eigen::Map<const RowMat<T>> w(self.inputs[1]->value.ptr(), C, D);
      Eigen::Map<RowMat<T>> gxm(gx, N, D);
      gxm.noalias() += g * w;
    }
    if (T* gw = sink(self, 1)) {
      Eigen::Map<const RowMat<T>> xv(self.inputs[0]->value.ptr(), N, D);
      Eigen::Map<RowMat<T>> gwm(gw, C, D);
      gwm.noalias() += g.transpose() * xv;
    }
    if (self.inputs.size() > 2)
      if (T* gb = sink(self, 2))
        for (int c = 0; c < C; ++c) gb[c] += g.col(c).sum();
  });
}

template <typename T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const int> labels) {
  if (logits.value().rank() != 2) throw ConfigurationError("cross_entropy: logits must be N×C");
  const int N = logits.value().dim(0), C = logits.value().dim(1);
  if (labels.size() != static_cast<std::size_t>(N)) throw ParameterError("cross_entropy: label count mismatch");
  auto probs = std::make_shared<std::vector<T>>(static_cast<std::size_t>(N) * C);
  std::vector<int> y(labels.begin(), labels.end());
  T loss = 0;
  for (int n = 0; n < N; ++n) {
    if (y[n] < 0 || y[n] >= C) throw ParameterError("cross_entropy: label out of range");
    const T* l = logits.value().ptr() + static_cast<std::size_t>(n) * C;
    const T mx = *std::max_element(l, l + C);
    T z = 0;
    for (int c = 0; c < C; ++c) z += std::exp(l[c] - mx);
    for (int c = 0; c < C; ++c) (*probs)[static_cast<std::size_t>(n) * C + c] = std::exp(l[c] - mx) / z;
    loss += -(l[y[n]] - mx - std::log(z));
  }
  loss /= static_cast<T>(N);
  return make_op<T>(Tensor<T>({1}, loss), {logits}, [=](Node<T>& self) {
    T* gl = sink(self, 0);
    if (!gl) return;
    const T g = self.grad[0] / static_cast<T>(N);
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        const std::size_t i = static_cast<std::size_t>(n) * C + c;
        gl[i] += g * ((*probs)[i] - (c == y[n] ? T(1) : T(0)));
      }
  });
}

#define PGI_INSTANTIATE_AG(T)                                                                  \
  template void backward(const Var<T>&);                                                       \
  template Var<T> detach(const Var<T>&);                                                       \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, Conv2dOptions);          \
  template Var<T> add(const Var<T>&, const Var<T>&);                                           \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                           \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                           \
  template Var<T> scale(const Var<T>&, T);                                                     \
  template Var<T> add_scalar(const Var<T>&, T);                                                \
  template Var<T> sigmoid(const Var<T>&);                                                      \
  template Var<T> tanh(const Var<T>&);                                                         \
  template Var<T> elu(const Var<T>&, T);                                                       \
  template Var<T> leaky_relu(const Var<T>&, T);                                                \
  template Var<T> relu(const Var<T>&);                                                         \
  template Var<T> abs(const Var<T>&);                                                          \
  template Var<T> square(const Var<T>&);                                                       \
  template Var<T> softplus(const Var<T>&);                                                     \
  template Var<T> sum(const Var<T>&);                                                          \
  template Var<T> mean(const Var<T>&);                                                         \
  template Var<T> instance_norm(const Var<T>&, const Var<T>&, const Var<T>&, T);               \
  template Var<T> resize_bilinear(const Var<T>&, int, int);                                    \
  template Var<T> concat_channels(std::span<const Var<T>>);                                    \
  template Var<T> slice_channels(const Var<T>&, int, int);                                     \
  template Var<T> concat_rows(std::span<const Var<T>>);                                        \
  template Var<T> global_avg_pool(const Var<T>&);                                              \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);                         \
  template Var<T> cross_entropy(const Var<T>&, std::span<const int>);

PGI_INSTANTIATE_AG(float)
PGI_INSTANTIATE_AG(double)

}  // namespace pgi::ag
