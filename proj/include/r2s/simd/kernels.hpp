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

// Dense arithmetic kernels with a portable scalar reference and an AVX2/FMA
// variant. The variant is picked once at startup from CPUID; R2S_SIMD=scalar
// (or avx2) in the environment forces a choice. All matrices are row-major.

#include <cstddef>
#include <span>
#include <string_view>

namespace r2s::simd {

enum class Backend { kScalar, kAvx2 };

std::string_view backend_name(Backend backend);

bool cpu_supports(Backend backend);

// Best backend the CPU supports, unless overridden through R2S_SIMD.
Backend default_backend();

Backend active_backend();

// Throws std::runtime_error when the CPU lacks the requested instructions.
void set_backend(Backend backend);

// C[M,N] = (accumulate ? C : 0) + A[M,K] * B[K,N]. No transposes; the
// dispatching gemm() below packs transposed operands first.
namespace scalar {
void gemm(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
          const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate);
void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);
float dot(const float* x, const float* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
void gemm(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
          const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate);
void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);
float dot(const float* x, const float* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

/// Matrix operand view: `trans` means the stored matrix is the transpose of
/// the logical operand (stored [cols x rows] with leading dimension `ld`).
template <typename T>
struct MatRef {
  const T* data;
  std::size_t ld;
  bool trans = false;
};

/// C[M,N] = (accumulate ? C : 0) + op(A)[M,K] * op(B)[K,N] on the active backend.
template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, MatRef<T> a, MatRef<T> b, T* c,
          std::size_t ldc, bool accumulate);

template <typename T>
T dot(std::span<const T> x, std::span<const T> y);

/// y += alpha * x
template <typename T>
void axpy(T alpha, std::span<const T> x, std::span<T> y);

}  // namespace r2s::simd
