/* Copyright (c) 2026 The r2s Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "r2s/nn/ops.hpp"

namespace r2s::nn {
namespace {

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw std::invalid_argument(std::string(op) + ": " + detail);
}

bool is_suffix(const Shape& full, const Shape& tail) {
  if (tail.size() > full.size()) return false;
  return std::equal(tail.begin(), tail.end(), full.end() - static_cast<std::ptrdiff_t>(tail.size()));
}

template <typename T>
void require_rank(const char* op, const Tensor<T>& x, std::size_t rank) {
  if (x.rank() != rank)
    shape_error(op, "expected rank " + std::to_string(rank) + ", got " + shape_str(x.shape()));
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (!is_suffix(a.shape(), b.shape()))
    shape_error("add", shape_str(b.shape()) + " does not broadcast to " + shape_str(a.shape()));
  const std::size_t inner = b.numel();
  std::vector<T> out(a.data().begin(), a.data().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.data()[i % inner];
  return make_result<T>(a.shape(), std::move(out), "add", {&a, &b}, [inner](Node<T>& self) {
    const std::vector<T>& g = self.grad;
    if (T* ga = parent_grad(self, 0))
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    if (T* gb = parent_grad(self, 1))
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % inner] += g[i];
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape())
    shape_error("mul", shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return make_result<T>(a.shape(), std::move(out), "mul", {&a, &b}, [](Node<T>& self) {
    const std::vector<T>& g = self.grad;
    const std::vector<T>& av = self.parents[0]->data;
    const std::vector<T>& bv = self.parents[1]->data;
    if (T* ga = parent_grad(self, 0))
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    if (T* gb = parent_grad(self, 1))
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, double factor) {
  const T f = static_cast<T>(factor);
  std::vector<T> out(a.data().begin(), a.data().end());
  for (T& v : out) v *= f;
  return make_result<T>(a.shape(), std::move(out), "scale", {&a}, [f](Node<T>& self) {
    T* ga = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += f * self.grad[i];
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> out(x.data().begin(), x.data().end());
  for (T& v : out) v = v > T(0) ? v : T(0);
  return make_result<T>(x.shape(), std::move(out), "relu", {&x}, [](Node<T>& self) {
    T* gx = parent_grad(self, 0);
    const std::vector<T>& xv = self.parents[0]->data;
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (xv[i] > T(0)) gx[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  const T inv_sqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T v = x.data()[i];
    out[i] = T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2));
  }
  return make_result<T>(x.shape(), std::move(out), "gelu", {&x}, [inv_sqrt2](Node<T>& self) {
    T* gx = parent_grad(self, 0);
    const std::vector<T>& xv = self.parents[0]->data;
    const T inv_sqrt2pi = static_cast<T>(0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const T v = xv[i];
      const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
      const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * v * v);
      gx[i] += self.grad[i] * (cdf + v * pdf);
    }
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc = 0;
  for (T v : x.data()) acc += v;
  return make_result<T>({1}, {acc}, "sum", {&x}, [](Node<T>& self) {
    T* gx = parent_grad(self, 0);
    const std::size_t n = self.parents[0]->data.size();
    for (std::size_t i = 0; i < n; ++i) gx[i] += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  const std::size_t n = x.numel();
  T acc = 0;
  for (T v : x.data()) acc += v;
  return make_result<T>({1}, {acc / static_cast<T>(n)}, "mean", {&x}, [n](Node<T>& self) {
    T* gx = parent_grad(self, 0);
    const T g = self.grad[0] / static_cast<T>(n);
    for (std::size_t i = 0; i < n; ++i) gx[i] += g;
  });
}

template <typename T>
Tensor<T> l1_loss(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape())
    shape_error("l1_loss", shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const std::size_t n = a.numel();
  // Accumulate in double so the float loss does not depend on summation drift.
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(static_cast<double>(a.data()[i]) - b.data()[i]);
  const T loss = static_cast<T>(acc / static_cast<double>(n));
  return make_result<T>({1}, {loss}, "l1_loss", {&a, &b}, [n](Node<T>& self) {
    const std::vector<T>& av = self.parents[0]->data;
    const std::vector<T>& bv = self.parents[1]->data;
    const T g = self.grad[0] / static_cast<T>(n);
    T* ga = parent_grad(self, 0);
    T* gb = parent_grad(self, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const T s = av[i] > bv[i] ? g : (av[i] < bv[i] ? -g : T(0));
      if (ga) ga[i] += s;
      if (gb) gb[i] -= s;
    }
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    shape_error("reshape", shape_str(x.shape()) + " to " + shape_str(shape));
  std::vector<T> out(x.data().begin(), x.data().end());
  return make_result<T>(std::move(shape), std::move(out), "reshape", {&x}, [](Node<T>& self) {
    T* gx = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, std::size_t r) {
  require_rank("pixel_shuffle", x, 4);
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (r == 0 || cin % (r * r) != 0)
    shape_error("pixel_shuffle", "channels " + std::to_string(cin) + " not divisible by r^2");
  const std::size_t c = cin / (r * r), ho = h * r, wo = w * r;
  // out index for every input element; the op is a permutation.
  auto index = std::make_shared<std::vector<std::size_t>>(x.numel());
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < cin; ++ch) {
      const std::size_t oc = ch / (r * r), i = (ch / r) % r, j = ch % r;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xx = 0; xx < w; ++xx)
          (*index)[((b * cin + ch) * h + y) * w + xx] =
              ((b * c + oc) * ho + y * r + i) * wo + xx * r + j;
    }
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[(*index)[i]] = x.data()[i];
  return make_result<T>({n, c, ho, wo}, std::move(out), "pixel_shuffle", {&x},
                        [index](Node<T>& self) {
                          T* gx = parent_grad(self, 0);
                          for (std::size_t i = 0; i < index->size(); ++i)
                            gx[i] += self.grad[(*index)[i]];
                        });
}

template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& x, std::size_t r) {
  require_rank("pixel_unshuffle", x, 4);
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (r == 0 || h % r != 0 || w % r != 0)
    shape_error("pixel_unshuffle", "spatial extents not divisible by r");
  const std::size_t ho = h / r, wo = w / r, co = c * r * r;
  auto index = std::make_shared<std::vector<std::size_t>>(x.numel());
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xx = 0; xx < w; ++xx) {
          const std::size_t oc = ch * r * r + (y % r) * r + xx % r;
          (*index)[((b * c + ch) * h + y) * w + xx] = ((b * co + oc) * ho + y / r) * wo + xx / r;
        }
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[(*index)[i]] = x.data()[i];
  return make_result<T>({n, co, ho, wo}, std::move(out), "pixel_unshuffle", {&x},
                        [index](Node<T>& self) {
                          T* gx = parent_grad(self, 0);
                          for (std::size_t i = 0; i < index->size(); ++i)
                            gx[i] += self.grad[(*index)[i]];
                        });
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank("concat_channels", a, 4);
  require_rank("concat_channels", b, 4);
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
    shape_error("concat_channels", shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const std::size_t n = a.dim(0), hw = a.dim(2) * a.dim(3);
  const std::size_t sa = a.dim(1) * hw, sb = b.dim(1) * hw;
  std::vector<T> out(n * (sa + sb));
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.data().begin() + i * sa, sa, out.begin() + i * (sa + sb));
    std::copy_n(b.data().begin() + i * sb, sb, out.begin() + i * (sa + sb) + sa);
  }
  return make_result<T>({n, a.dim(1) + b.dim(1), a.dim(2), a.dim(3)}, std::move(out),
                        "concat_channels", {&a, &b}, [n, sa, sb](Node<T>& self) {
                          const T* g = self.grad.data();
                          if (T* ga = parent_grad(self, 0))
                            for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t j = 0; j < sa; ++j) ga[i * sa + j] += g[i * (sa + sb) + j];
                          if (T* gb = parent_grad(self, 1))
                            for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t j = 0; j < sb; ++j)
                                gb[i * sb + j] += g[i * (sa + sb) + sa + j];
                        });
}

template <typename T>
Tensor<T> crop_spatial(const Tensor<T>& x, std::size_t h, std::size_t w) {
  require_rank("crop_spatial", x, 4);
  if (h == 0 || w == 0 || h > x.dim(2) || w > x.dim(3))
    shape_error("crop_spatial", "crop larger than " + shape_str(x.shape()));
  const std::size_t planes = x.dim(0) * x.dim(1), hi = x.dim(2), wi = x.dim(3);
  std::vector<T> out(planes * h * w);
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t y = 0; y < h; ++y)
      std::copy_n(x.data().begin() + (p * hi + y) * wi, w, out.begin() + (p * h + y) * w);
  return make_result<T>({x.dim(0), x.dim(1), h, w}, std::move(out), "crop_spatial", {&x},
                        [planes, hi, wi, h, w](Node<T>& self) {
                          T* gx = parent_grad(self, 0);
                          for (std::size_t p = 0; p < planes; ++p)
                            for (std::size_t y = 0; y < h; ++y)
                              for (std::size_t i = 0; i < w; ++i)
                                gx[(p * hi + y) * wi + i] += self.grad[(p * h + y) * w + i];
                        });
}

template <typename T>
Tensor<T> to_tokens(const Tensor<T>& x) {
  require_rank("to_tokens", x, 4);
  const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  std::vector<T> out(x.numel());
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t p = 0; p < hw; ++p) out[(b * hw + p) * c + ch] = x.data()[(b * c + ch) * hw + p];
  return make_result<T>({n, hw, c}, std::move(out), "to_tokens", {&x}, [n, c, hw](Node<T>& self) {
    T* gx = parent_grad(self, 0);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t p = 0; p < hw; ++p) gx[(b * c + ch) * hw + p] += self.grad[(b * hw + p) * c + ch];
  });
}

template <typename T>
Tensor<T> from_tokens(const Tensor<T>& x, std::size_t h, std::size_t w) {
  require_rank("from_tokens", x, 3);
  const std::size_t n = x.dim(0), hw = x.dim(1), c = x.dim(2);
  if (hw != h * w) shape_error("from_tokens", "token count " + std::to_string(hw) + " != h*w");
  std::vector<T> out(x.numel());
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t p = 0; p < hw; ++p) out[(b * c + ch) * hw + p] = x.data()[(b * hw + p) * c + ch];
  return make_result<T>({n, c, h, w}, std::move(out), "from_tokens", {&x}, [n, c, hw](Node<T>& self) {
    T* gx = parent_grad(self, 0);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t p = 0; p < hw; ++p) gx[(b * hw + p) * c + ch] += self.grad[(b * c + ch) * hw + p];
  });
}

#define R2S_INSTANTIATE(T)                                                        \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> scale(const Tensor<T>&, double);                             \
  template Tensor<T> relu(const Tensor<T>&);                                      \
  template Tensor<T> gelu(const Tensor<T>&);                                      \
  template Tensor<T> sum(const Tensor<T>&);                                       \
  template Tensor<T> mean(const Tensor<T>&);                                      \
  template Tensor<T> l1_loss(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                            \
  template Tensor<T> pixel_shuffle(const Tensor<T>&, std::size_t);                \
  template Tensor<T> pixel_unshuffle(const Tensor<T>&, std::size_t);              \
  template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);         \
  template Tensor<T> crop_spatial(const Tensor<T>&, std::size_t, std::size_t);    \
  template Tensor<T> to_tokens(const Tensor<T>&);                                 \
  template Tensor<T> from_tokens(const Tensor<T>&, std::size_t, std::size_t);

R2S_INSTANTIATE(float)
R2S_INSTANTIATE(double)
#undef R2S_INSTANTIATE

}  // namespace r2s::nn
