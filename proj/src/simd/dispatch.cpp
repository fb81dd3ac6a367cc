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
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "r2s/simd/kernels.hpp"

namespace r2s::simd {
namespace {

Backend initial_backend() {
  if (const char* forced = std::getenv("R2S_SIMD")) {
    const std::string_view name(forced);
    if (name == "scalar") return Backend::kScalar;
    if (name == "avx2" && cpu_supports(Backend::kAvx2)) return Backend::kAvx2;
  }
  return cpu_supports(Backend::kAvx2) ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{initial_backend()};
  return slot;
}

template <typename T>
void pack_transposed(const T* src, std::size_t ld, std::size_t rows, std::size_t cols,
                     std::vector<T>& dst) {
  // src stores the [cols x rows] transpose; dst becomes dense [rows x cols].
  dst.resize(rows * cols);
  constexpr std::size_t kTile = 32;
  for (std::size_t c0 = 0; c0 < cols; c0 += kTile)
    for (std::size_t r0 = 0; r0 < rows; r0 += kTile)
      for (std::size_t c = c0; c < std::min(cols, c0 + kTile); ++c)
        for (std::size_t r = r0; r < std::min(rows, r0 + kTile); ++r)
          dst[r * cols + c] = src[c * ld + r];
}

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
             const T* b, std::size_t ldb, T* c, std::size_t ldc, bool accumulate) {
  if (active_backend() == Backend::kAvx2)
    avx2::gemm(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
  else
    scalar::gemm(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

}  // namespace

std::string_view backend_name(Backend backend) {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

bool cpu_supports(Backend backend) {
  if (backend == Backend::kScalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend default_backend() { return initial_backend(); }

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (!cpu_supports(backend))
    throw std::runtime_error("simd backend not supported by this CPU: " +
                             std::string(backend_name(backend)));
  backend_slot().store(backend, std::memory_order_relaxed);
}

template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, MatRef<T> a, MatRef<T> b, T* c,
          std::size_t ldc, bool accumulate) {
  thread_local std::vector<T> a_pack;
  thread_local std::vector<T> b_pack;
  const T* ap = a.data;
  std::size_t lda = a.ld;
  const T* bp = b.data;
  std::size_t ldb = b.ld;
  if (a.trans && m > 0 && k > 0) {
    pack_transposed(a.data, a.ld, m, k, a_pack);
    ap = a_pack.data();
    lda = k;
  }
  if (b.trans && k > 0 && n > 0) {
    pack_transposed(b.data, b.ld, k, n, b_pack);
    bp = b_pack.data();
    ldb = n;
  }
  gemm_nn(m, n, k, ap, lda, bp, ldb, c, ldc, accumulate);
}

template <typename T>
T dot(std::span<const T> x, std::span<const T> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
  return active_backend() == Backend::kAvx2 ? avx2::dot(x.data(), y.data(), x.size())
                                            : scalar::dot(x.data(), y.data(), x.size());
}

template <typename T>
void axpy(T alpha, std::span<const T> x, std::span<T> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  if (active_backend() == Backend::kAvx2)
    avx2::axpy(alpha, x.data(), y.data(), x.size());
  else
    scalar::axpy(alpha, x.data(), y.data(), x.size());
}

template void gemm<float>(std::size_t, std::size_t, std::size_t, MatRef<float>, MatRef<float>,
                          float*, std::size_t, bool);
template void gemm<double>(std::size_t, std::size_t, std::size_t, MatRef<double>,
                           MatRef<double>, double*, std::size_t, bool);
template float dot<float>(std::span<const float>, std::span<const float>);
template double dot<double>(std::span<const double>, std::span<const double>);
template void axpy<float>(float, std::span<const float>, std::span<float>);
template void axpy<double>(double, std::span<const double>, std::span<double>);

}  // namespace r2s::simd
