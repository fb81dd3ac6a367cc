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

#pragma once

// Differentiable operations. Shape errors throw std::invalid_argument with
// the op name; every result is checked for finiteness.

#include <cstddef>

#include "r2s/nn/tensor.hpp"

namespace r2s::nn {

/// a + b, where b has the shape of a or of a trailing suffix of a's shape
/// (broadcast over the leading dimensions).
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

/// Element-wise product of equal shapes.
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& a, double factor);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

/// Exact GELU, x * Phi(x).
template <typename T>
Tensor<T> gelu(const Tensor<T>& x);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

template <typename T>
Tensor<T> mean(const Tensor<T>& x);

/// mean |a - b| over all elements.
template <typename T>
Tensor<T> l1_loss(const Tensor<T>& a, const Tensor<T>& b);

/// Same data, new shape of equal element count.
template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

/// Cross-correlation of x[N,C,H,W] with w[Co,C,K,K] (K odd), zero padding
/// K/2 and stride 1 or 2. Output extents are ceil(H/stride) x ceil(W/stride).
/// `bias` ([Co]) may be undefined.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 std::size_t stride = 1);

/// Depth-to-space: [N, C*r*r, H, W] -> [N, C, H*r, W*r]; channel c*r*r + i*r + j
/// lands at offset (i, j) of each r x r block.
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, std::size_t r);

template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& x, std::size_t r);

/// Concatenate [N,Ca,H,W] and [N,Cb,H,W] along channels.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

/// y = x w^T + b over the last dimension; x[..., in], w[out, in], b[out]
/// (b may be undefined).
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

/// Normalizes the last dimension, then applies gamma and beta.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     double eps = 1e-5);

/// Softmax over the last dimension.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x);

/// Multi-head scaled dot-product attention on q, k, v of shape [B, L, D]:
/// per head h, softmax(Q_h K_h^T / sqrt(D / heads)) V_h, heads concatenated.
template <typename T>
Tensor<T> attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                    std::size_t heads);

template <typename T>
struct AttentionWeights {
  Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;  // [D,D] weights, [D] biases
};

/// Self-attention block on x[B, L, D]: q/k/v projections, attention(), then
/// the output projection.
template <typename T>
Tensor<T> multihead_attention(const Tensor<T>& x, const AttentionWeights<T>& w, std::size_t heads);

/// Frequency transform: for x[N,C,F,T] and w[F,F], y[n,c,:,t] = w x[n,c,:,t].
template <typename T>
Tensor<T> freq_transform(const Tensor<T>& x, const Tensor<T>& w);

/// Keeps the top-left h x w corner of x[N,C,H,W].
template <typename T>
Tensor<T> crop_spatial(const Tensor<T>& x, std::size_t h, std::size_t w);

/// [N,C,H,W] -> [N, H*W, C] (raster order of spatial positions).
template <typename T>
Tensor<T> to_tokens(const Tensor<T>& x);

/// [N, H*W, C] -> [N,C,H,W].
template <typename T>
Tensor<T> from_tokens(const Tensor<T>& x, std::size_t h, std::size_t w);

}  // namespace r2s::nn
