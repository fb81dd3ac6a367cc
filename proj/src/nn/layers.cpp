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
#include <stdexcept>

#include "r2s/nn/ops.hpp"
#include "r2s/simd/kernels.hpp"

namespace r2s::nn {
namespace {

using simd::gemm;
using simd::MatRef;

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw std::invalid_argument(std::string(op) + ": " + detail);
}

struct ConvGeometry {
  std::size_t n, c, h, w, co, k, stride, pad, ho, wo;
  std::size_t patch() const { return c * k * k; }
  std::size_t out_hw() const { return ho * wo; }
  bool pointwise() const { return k == 1 && stride == 1; }
};

template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* cols) {
  for (std::size_t ch = 0; ch < g.c; ++ch)
    for (std::size_t ky = 0; ky < g.k; ++ky)
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        T* row = cols + ((ch * g.k + ky) * g.k + kx) * g.out_hw();
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          T* dst = row + oy * g.wo;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) {
            std::fill_n(dst, g.wo, T(0));
            continue;
          }
          const T* src = x + (ch * g.h + static_cast<std::size_t>(iy)) * g.w;
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.pad);
            dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) ? T(0) : src[ix];
          }
        }
      }
}

template <typename T>
void col2im_add(const ConvGeometry& g, const T* cols, T* x) {
  for (std::size_t ch = 0; ch < g.c; ++ch)
    for (std::size_t ky = 0; ky < g.k; ++ky)
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const T* row = cols + ((ch * g.k + ky) * g.k + kx) * g.out_hw();
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          T* dst = x + (ch * g.h + static_cast<std::size_t>(iy)) * g.w;
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.pad);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.w)) dst[ix] += row[oy * g.wo + ox];
          }
        }
      }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, std::size_t stride) {
  if (x.rank() != 4 || w.rank() != 4) shape_error("conv2d", "expects x[N,C,H,W] and w[Co,C,K,K]");
  if (w.dim(1) != x.dim(1))
    shape_error("conv2d", "kernel " + shape_str(w.shape()) + " vs input " + shape_str(x.shape()));
  if (w.dim(2) != w.dim(3) || w.dim(2) % 2 == 0) shape_error("conv2d", "kernel must be square and odd");
  if (stride != 1 && stride != 2) shape_error("conv2d", "stride must be 1 or 2");
  if (bias.defined() && bias.shape() != Shape{w.dim(0)}) shape_error("conv2d", "bias must be [Co]");

  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), stride, w.dim(2) / 2, 0, 0};
  g.ho = (g.h + g.stride - 1) / g.stride;
  g.wo = (g.w + g.stride - 1) / g.stride;

  std::vector<T> out(g.n * g.co * g.out_hw());
  std::vector<T> cols(g.pointwise() ? 0 : g.patch() * g.out_hw());
  for (std::size_t b = 0; b < g.n; ++b) {
    const T* xb = x.data().data() + b * g.c * g.h * g.w;
    const T* src = xb;
    if (!g.pointwise()) {
      im2col(g, xb, cols.data());
      src = cols.data();
    }
    T* ob = out.data() + b * g.co * g.out_hw();
    gemm<T>(g.co, g.out_hw(), g.patch(), {w.data().data(), g.patch()}, {src, g.out_hw()}, ob,
            g.out_hw(), false);
    if (bias.defined())
      for (std::size_t o = 0; o < g.co; ++o)
        for (std::size_t p = 0; p < g.out_hw(); ++p) ob[o * g.out_hw() + p] += bias.data()[o];
  }

  return make_result<T>({g.n, g.co, g.ho, g.wo}, std::move(out), "conv2d", {&x, &w, &bias},
                        [g](Node<T>& self) {
    const T* xv = self.parents[0]->data.data();
    const T* wv = self.parents[1]->data.data();
    T* gx = parent_grad(self, 0);
    T* gw = parent_grad(self, 1);
    T* gb = self.parents.size() > 2 ? parent_grad(self, 2) : nullptr;
    std::vector<T> cols(g.pointwise() ? 0 : g.patch() * g.out_hw());
    std::vector<T> dcols(gx && !g.pointwise() ? g.patch() * g.out_hw() : 0);
    for (std::size_t b = 0; b < g.n; ++b) {
      const T* go = self.grad.data() + b * g.co * g.out_hw();
      const T* xb = xv + b * g.c * g.h * g.w;
      if (gw) {
        const T* src = xb;
        if (!g.pointwise()) {
          im2col(g, xb, cols.data());
          src = cols.data();
        }
        // dW[Co, CKK] += dOut[Co, HW] * cols^T
        gemm<T>(g.co, g.patch(), g.out_hw(), {go, g.out_hw()}, {src, g.out_hw(), true}, gw,
                g.patch(), true);
      }
      if (gb)
        for (std::size_t o = 0; o < g.co; ++o)
          for (std::size_t p = 0; p < g.out_hw(); ++p) gb[o] += go[o * g.out_hw() + p];
      if (gx) {
        T* gxb = gx + b * g.c * g.h * g.w;
        // dcols[CKK, HW] = W^T * dOut
        if (g.pointwise()) {
          gemm<T>(g.patch(), g.out_hw(), g.co, {wv, g.patch(), true}, {go, g.out_hw()}, gxb,
                  g.out_hw(), true);
        } else {
          gemm<T>(g.patch(), g.out_hw(), g.co, {wv, g.patch(), true}, {go, g.out_hw()},
                  dcols.data(), g.out_hw(), false);
          col2im_add(g, dcols.data(), gxb);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  if (w.rank() != 2 || x.rank() < 1 || x.shape().back() != w.dim(1))
    shape_error("linear", "input " + shape_str(x.shape()) + " vs weight " + shape_str(w.shape()));
  const std::size_t in = w.dim(1), out_dim = w.dim(0), rows = x.numel() / in;
  if (b.defined() && b.shape() != Shape{out_dim}) shape_error("linear", "bias must be [out]");
  std::vector<T> out(rows * out_dim);
  gemm<T>(rows, out_dim, in, {x.data().data(), in}, {w.data().data(), in, true}, out.data(), out_dim,
          false);
  if (b.defined())
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t o = 0; o < out_dim; ++o) out[r * out_dim + o] += b.data()[o];
  Shape shape = x.shape();
  shape.back() = out_dim;
  return make_result<T>(std::move(shape), std::move(out), "linear", {&x, &w, &b},
                        [in, out_dim, rows](Node<T>& self) {
    const T* go = self.grad.data();
    if (T* gx = parent_grad(self, 0))
      gemm<T>(rows, in, out_dim, {go, out_dim}, {self.parents[1]->data.data(), in}, gx, in, true);
    if (T* gw = parent_grad(self, 1))
      gemm<T>(out_dim, in, rows, {go, out_dim, true}, {self.parents[0]->data.data(), in}, gw, in, true);
    if (self.parents.size() > 2)
      if (T* gb = parent_grad(self, 2))
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t o = 0; o < out_dim; ++o) gb[o] += go[r * out_dim + o];
  });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, double eps) {
  const std::size_t d = x.shape().back();
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d})
    shape_error("layer_norm", "gamma and beta must be [" + std::to_string(d) + "]");
  const std::size_t rows = x.numel() / d;
  auto xhat = std::make_shared<std::vector<T>>(x.numel());
  auto rstd = std::make_shared<std::vector<T>>(rows);
  std::vector<T> out(x.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data().data() + r * d;
    T mu = 0;
    for (std::size_t i = 0; i < d; ++i) mu += xr[i];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t i = 0; i < d; ++i) var += (xr[i] - mu) * (xr[i] - mu);
    var /= static_cast<T>(d);
    const T rs = T(1) / std::sqrt(var + static_cast<T>(eps));
    (*rstd)[r] = rs;
    for (std::size_t i = 0; i < d; ++i) {
      const T h = (xr[i] - mu) * rs;
      (*xhat)[r * d + i] = h;
      out[r * d + i] = h * gamma.data()[i] + beta.data()[i];
    }
  }
  return make_result<T>(x.shape(), std::move(out), "layer_norm", {&x, &gamma, &beta},
                        [d, rows, xhat, rstd](Node<T>& self) {
    const T* go = self.grad.data();
    const T* gam = self.parents[1]->data.data();
    T* gx = parent_grad(self, 0);
    T* gg = parent_grad(self, 1);
    T* gbeta = parent_grad(self, 2);
    std::vector<T> dh(d);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* h = xhat->data() + r * d;
      const T* g = go + r * d;
      if (gg)
        for (std::size_t i = 0; i < d; ++i) gg[i] += g[i] * h[i];
      if (gbeta)
        for (std::size_t i = 0; i < d; ++i) gbeta[i] += g[i];
      if (!gx) continue;
      T mean_dh = 0, mean_dhh = 0;
      for (std::size_t i = 0; i < d; ++i) {
        dh[i] = g[i] * gam[i];
        mean_dh += dh[i];
        mean_dhh += dh[i] * h[i];
      }
      mean_dh /= static_cast<T>(d);
      mean_dhh /= static_cast<T>(d);
      for (std::size_t i = 0; i < d; ++i)
        gx[r * d + i] += (*rstd)[r] * (dh[i] - mean_dh - h[i] * mean_dhh);
    }
  });
}

namespace {

template <typename T>
void softmax_rows(T* data, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    T* row = data + r * cols;
    const T mx = *std::max_element(row, row + cols);
    T total = 0;
    for (std::size_t i = 0; i < cols; ++i) {
      row[i] = std::exp(row[i] - mx);
      total += row[i];
    }
    for (std::size_t i = 0; i < cols; ++i) row[i] /= total;
  }
}

// grad wrt the logits given the softmax output p and the grad wrt p.
template <typename T>
void softmax_backward_rows(const T* p, const T* gp, T* gs, std::size_t rows, std::size_t cols,
                           T factor, bool accumulate) {
  for (std::size_t r = 0; r < rows; ++r) {
    const T* pr = p + r * cols;
    const T* gr = gp + r * cols;
    T dotp = 0;
    for (std::size_t i = 0; i < cols; ++i) dotp += pr[i] * gr[i];
    T* out = gs + r * cols;
    for (std::size_t i = 0; i < cols; ++i) {
      const T v = factor * pr[i] * (gr[i] - dotp);
      out[i] = accumulate ? out[i] + v : v;
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  const std::size_t cols = x.shape().back(), rows = x.numel() / cols;
  std::vector<T> out(x.data().begin(), x.data().end());
  softmax_rows(out.data(), rows, cols);
  auto probs = std::make_shared<std::vector<T>>(out);
  return make_result<T>(x.shape(), std::move(out), "softmax", {&x}, [rows, cols, probs](Node<T>& self) {
    softmax_backward_rows(probs->data(), self.grad.data(), parent_grad(self, 0), rows, cols, T(1), true);
  });
}

template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, std::size_t heads) {
  if (q.rank() != 3 || q.shape() != k.shape() || q.shape() != v.shape())
    shape_error("attention", "q, k, v must share a [B,L,D] shape");
  const std::size_t batch = q.dim(0), len = q.dim(1), d = q.dim(2);
  if (heads == 0 || d % heads != 0)
    shape_error("attention", "model dim " + std::to_string(d) + " not divisible by heads");
  const std::size_t dh = d / heads;
  const T factor = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
  auto probs = std::make_shared<std::vector<T>>(batch * heads * len * len);
  std::vector<T> out(q.numel());
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = b * len * d + h * dh;
      T* p = probs->data() + (b * heads + h) * len * len;
      gemm<T>(len, len, dh, {q.data().data() + off, d}, {k.data().data() + off, d, true}, p, len, false);
      for (std::size_t i = 0; i < len * len; ++i) p[i] *= factor;
      softmax_rows(p, len, len);
      gemm<T>(len, dh, len, {p, len}, {v.data().data() + off, d}, out.data() + off, d, false);
    }
  return make_result<T>(q.shape(), std::move(out), "attention", {&q, &k, &v},
                        [batch, len, d, dh, heads, factor, probs](Node<T>& self) {
    const T* qv = self.parents[0]->data.data();
    const T* kv = self.parents[1]->data.data();
    const T* vv = self.parents[2]->data.data();
    T* gq = parent_grad(self, 0);
    T* gk = parent_grad(self, 1);
    T* gv = parent_grad(self, 2);
    std::vector<T> dp(len * len), ds(len * len);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t off = b * len * d + h * dh;
        const T* p = probs->data() + (b * heads + h) * len * len;
        const T* go = self.grad.data() + off;
        if (gv) gemm<T>(len, dh, len, {p, len, true}, {go, d}, gv + off, d, true);
        if (!gq && !gk) continue;
        gemm<T>(len, len, dh, {go, d}, {vv + off, d, true}, dp.data(), len, false);
        softmax_backward_rows(p, dp.data(), ds.data(), len, len, factor, false);
        if (gq) gemm<T>(len, dh, len, {ds.data(), len}, {kv + off, d}, gq + off, d, true);
        if (gk) gemm<T>(len, dh, len, {ds.data(), len, true}, {qv + off, d}, gk + off, d, true);
      }
  });
}

template <typename T>
Tensor<T> multihead_attention(const Tensor<T>& x, const AttentionWeights<T>& w, std::size_t heads) {
  const Tensor<T> q = linear(x, w.wq, w.bq);
  const Tensor<T> k = linear(x, w.wk, w.bk);
  const Tensor<T> v = linear(x, w.wv, w.bv);
  return linear(attention(q, k, v, heads), w.wo, w.bo);
}

template <typename T>
Tensor<T> freq_transform(const Tensor<T>& x, const Tensor<T>& w) {
  if (x.rank() != 4) shape_error("freq_transform", "expects x[N,C,F,T]");
  const std::size_t f = x.dim(2), t = x.dim(3), planes = x.dim(0) * x.dim(1);
  if (w.shape() != Shape{f, f})
    shape_error("freq_transform", "W_tr " + shape_str(w.shape()) + " does not match F=" + std::to_string(f));
  std::vector<T> out(x.numel());
  for (std::size_t p = 0; p < planes; ++p)
    gemm<T>(f, t, f, {w.data().data(), f}, {x.data().data() + p * f * t, t}, out.data() + p * f * t, t,
            false);
  return make_result<T>(x.shape(), std::move(out), "freq_transform", {&x, &w},
                        [f, t, planes](Node<T>& self) {
    const T* xv = self.parents[0]->data.data();
    const T* wv = self.parents[1]->data.data();
    T* gx = parent_grad(self, 0);
    T* gw = parent_grad(self, 1);
    for (std::size_t p = 0; p < planes; ++p) {
      const T* go = self.grad.data() + p * f * t;
      if (gx) gemm<T>(f, t, f, {wv, f, true}, {go, t}, gx + p * f * t, t, true);
      if (gw) gemm<T>(f, f, t, {go, t}, {xv + p * f * t, t, true}, gw, f, true);
    }
  });
}

#define R2S_INSTANTIATE(T)                                                                   \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t); \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double); \
  template Tensor<T> softmax(const Tensor<T>&);                                              \
  template Tensor<T> attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t); \
  template Tensor<T> multihead_attention(const Tensor<T>&, const AttentionWeights<T>&, std::size_t); \
  template Tensor<T> freq_transform(const Tensor<T>&, const Tensor<T>&);

R2S_INSTANTIATE(float)
R2S_INSTANTIATE(double)
#undef R2S_INSTANTIATE

}  // namespace r2s::nn
