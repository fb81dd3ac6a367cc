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

#include "r2s/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cstdint>

// Built with -mavx2 -mfma; only reached through the runtime dispatcher.

namespace r2s::simd::avx2 {
namespace {

constexpr std::size_t kBlockK = 256;
constexpr int kRows = 6;

// Lane mask enabling the first `count` 32-bit lanes (count in [0, 8]).
inline __m256i lane_mask32(std::size_t count) {
  alignas(32) static constexpr std::int32_t kTable[16] = {-1, -1, -1, -1, -1, -1, -1, -1,
                                                          0,  0,  0,  0,  0,  0,  0,  0};
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(kTable + 8 - count));
}

inline __m256i lane_mask64(std::size_t count) {
  alignas(32) static constexpr std::int64_t kTable[8] = {-1, -1, -1, -1, 0, 0, 0, 0};
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(kTable + 4 - count));
}

// 6x16 float tile: two 8-lane accumulators per row.
template <int R, bool kFull>
inline void tile_f32(std::size_t kc, const float* a, std::size_t lda, const float* b,
                     std::size_t ldb, float* c, std::size_t ldc, bool load_c, __m256i m0,
                     __m256i m1) {
  __m256 acc0[R];
  __m256 acc1[R];
  for (int r = 0; r < R; ++r) {
    if (load_c) {
      float* cr = c + r * ldc;
      acc0[r] = kFull ? _mm256_loadu_ps(cr) : _mm256_maskload_ps(cr, m0);
      acc1[r] = kFull ? _mm256_loadu_ps(cr + 8) : _mm256_maskload_ps(cr + 8, m1);
    } else {
      acc0[r] = _mm256_setzero_ps();
      acc1[r] = _mm256_setzero_ps();
    }
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const float* bp = b + p * ldb;
    const __m256 b0 = kFull ? _mm256_loadu_ps(bp) : _mm256_maskload_ps(bp, m0);
    const __m256 b1 = kFull ? _mm256_loadu_ps(bp + 8) : _mm256_maskload_ps(bp + 8, m1);
    for (int r = 0; r < R; ++r) {
      const __m256 av = _mm256_broadcast_ss(a + r * lda + p);
      acc0[r] = _mm256_fmadd_ps(av, b0, acc0[r]);
      acc1[r] = _mm256_fmadd_ps(av, b1, acc1[r]);
    }
  }
  for (int r = 0; r < R; ++r) {
    float* cr = c + r * ldc;
    if (kFull) {
      _mm256_storeu_ps(cr, acc0[r]);
      _mm256_storeu_ps(cr + 8, acc1[r]);
    } else {
      _mm256_maskstore_ps(cr, m0, acc0[r]);
      _mm256_maskstore_ps(cr + 8, m1, acc1[r]);
    }
  }
}

// 6x8 double tile.
template <int R, bool kFull>
inline void tile_f64(std::size_t kc, const double* a, std::size_t lda, const double* b,
                     std::size_t ldb, double* c, std::size_t ldc, bool load_c, __m256i m0,
                     __m256i m1) {
  __m256d acc0[R];
  __m256d acc1[R];
  for (int r = 0; r < R; ++r) {
    if (load_c) {
      double* cr = c + r * ldc;
      acc0[r] = kFull ? _mm256_loadu_pd(cr) : _mm256_maskload_pd(cr, m0);
      acc1[r] = kFull ? _mm256_loadu_pd(cr + 4) : _mm256_maskload_pd(cr + 4, m1);
    } else {
      acc0[r] = _mm256_setzero_pd();
      acc1[r] = _mm256_setzero_pd();
    }
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const double* bp = b + p * ldb;
    const __m256d b0 = kFull ? _mm256_loadu_pd(bp) : _mm256_maskload_pd(bp, m0);
    const __m256d b1 = kFull ? _mm256_loadu_pd(bp + 4) : _mm256_maskload_pd(bp + 4, m1);
    for (int r = 0; r < R; ++r) {
      const __m256d av = _mm256_broadcast_sd(a + r * lda + p);
      acc0[r] = _mm256_fmadd_pd(av, b0, acc0[r]);
      acc1[r] = _mm256_fmadd_pd(av, b1, acc1[r]);
    }
  }
  for (int r = 0; r < R; ++r) {
    double* cr = c + r * ldc;
    if (kFull) {
      _mm256_storeu_pd(cr, acc0[r]);
      _mm256_storeu_pd(cr + 4, acc1[r]);
    } else {
      _mm256_maskstore_pd(cr, m0, acc0[r]);
      _mm256_maskstore_pd(cr + 4, m1, acc1[r]);
    }
  }
}

template <bool kFull, typename Tile>
inline void rows_dispatch(int rows, Tile&& tile) {
  switch (rows) {
    case 6: tile.template operator()<6, kFull>(); break;
    case 5: tile.template operator()<5, kFull>(); break;
    case 4: tile.template operator()<4, kFull>(); break;
    case 3: tile.template operator()<3, kFull>(); break;
    case 2: tile.template operator()<2, kFull>(); break;
    default: tile.template operator()<1, kFull>(); break;
  }
}

// Loop order k-block -> column panel -> row tile keeps one B panel hot in L1
// while every row tile of A streams past it. Each C element accumulates its
// k terms in ascending order, so results do not depend on the blocking.
template <typename T, std::size_t kWidth, typename MaskFn, typename TileFn>
void gemm_driver(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
                 const T* b, std::size_t ldb, T* c, std::size_t ldc, bool accumulate,
                 MaskFn mask, TileFn tile_fn) {
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (!accumulate)
      for (std::size_t i = 0; i < m; ++i) std::fill(c + i * ldc, c + i * ldc + n, T(0));
    return;
  }
  constexpr std::size_t kHalf = kWidth / 2;
  for (std::size_t k0 = 0; k0 < k; k0 += kBlockK) {
    const std::size_t kc = std::min(kBlockK, k - k0);
    const bool load_c = accumulate || k0 > 0;
    for (std::size_t j0 = 0; j0 < n; j0 += kWidth) {
      const std::size_t width = std::min(kWidth, n - j0);
      const bool full = width == kWidth;
      const __m256i m0 = mask(std::min(width, kHalf));
      const __m256i m1 = mask(width > kHalf ? width - kHalf : 0);
      for (std::size_t i0 = 0; i0 < m; i0 += kRows) {
        const int rows = static_cast<int>(std::min<std::size_t>(kRows, m - i0));
        const T* ap = a + i0 * lda + k0;
        const T* bp = b + k0 * ldb + j0;
        T* cp = c + i0 * ldc + j0;
        auto tile = [&]<int R, bool F>() { tile_fn.template operator()<R, F>(kc, ap, bp, cp, load_c, m0, m1); };
        if (full)
          rows_dispatch<true>(rows, tile);
        else
          rows_dispatch<false>(rows, tile);
      }
    }
  }
}

inline float hsum(__m256 v) {
  const __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_movehdup_ps(s));
  return _mm_cvtss_f32(s);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  return _mm_cvtsd_f64(s);
}

}  // namespace

void gemm(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
          const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
  gemm_driver<float, 16>(
      m, n, k, a, lda, b, ldb, c, ldc, accumulate, lane_mask32,
      [&]<int R, bool F>(std::size_t kc, const float* ap, const float* bp, float* cp,
                         bool load_c, __m256i m0, __m256i m1) {
        tile_f32<R, F>(kc, ap, lda, bp, ldb, cp, ldc, load_c, m0, m1);
      });
}

void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  gemm_driver<double, 8>(
      m, n, k, a, lda, b, ldb, c, ldc, accumulate, lane_mask64,
      [&]<int R, bool F>(std::size_t kc, const double* ap, const double* bp, double* cp,
                         bool load_c, __m256i m0, __m256i m1) {
        tile_f64<R, F>(kc, ap, lda, bp, ldb, cp, ldc, load_c, m0, m1);
      });
}

float dot(const float* x, const float* y, std::size_t n) {
  __m256 acc[4] = {_mm256_setzero_ps(), _mm256_setzero_ps(), _mm256_setzero_ps(),
                   _mm256_setzero_ps()};
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32)
    for (int u = 0; u < 4; ++u)
      acc[u] = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8 * u), _mm256_loadu_ps(y + i + 8 * u),
                               acc[u]);
  for (; i + 8 <= n; i += 8)
    acc[0] = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc[0]);
  float total = hsum(_mm256_add_ps(_mm256_add_ps(acc[0], acc[1]), _mm256_add_ps(acc[2], acc[3])));
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc[4] = {_mm256_setzero_pd(), _mm256_setzero_pd(), _mm256_setzero_pd(),
                    _mm256_setzero_pd()};
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16)
    for (int u = 0; u < 4; ++u)
      acc[u] = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4 * u), _mm256_loadu_pd(y + i + 4 * u),
                               acc[u]);
  for (; i + 4 <= n; i += 4)
    acc[0] = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc[0]);
  double total =
      hsum(_mm256_add_pd(_mm256_add_pd(acc[0], acc[1]), _mm256_add_pd(acc[2], acc[3])));
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace r2s::simd::avx2
