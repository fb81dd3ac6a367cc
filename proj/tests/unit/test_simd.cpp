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

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "r2s/simd/kernels.hpp"

using namespace r2s::simd;

namespace {

template <typename T>
std::vector<T> random_vec(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(dist(gen));
  return v;
}

// Plain triple loop in long double, independent of both kernel variants.
template <typename T>
std::vector<long double> reference_gemm(std::size_t m, std::size_t n, std::size_t k,
                                        const std::vector<T>& a, bool ta, const std::vector<T>& b,
                                        bool tb, const std::vector<T>& c0, bool accumulate) {
  std::vector<long double> c(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      long double acc = accumulate ? c0[i * n + j] : 0.0L;
      for (std::size_t p = 0; p < k; ++p) {
        const T av = ta ? a[p * m + i] : a[i * k + p];
        const T bv = tb ? b[j * k + p] : b[p * n + j];
        acc += static_cast<long double>(av) * bv;
      }
      c[i * n + j] = acc;
    }
  return c;
}

struct BackendGuard {
  Backend saved = active_backend();
  ~BackendGuard() { set_backend(saved); }
};

template <typename T>
void check_gemm_equivalence(double tol) {
  BackendGuard guard;
  std::mt19937_64 gen(42);
  std::uniform_int_distribution<std::size_t> dim(1, 70);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t m = dim(gen), n = dim(gen), k = trial % 10 == 0 ? 300 : dim(gen);
    const bool ta = trial % 3 == 1, tb = trial % 4 == 2, acc = trial % 2 == 1;
    const auto a = random_vec<T>(m * k, gen);
    const auto b = random_vec<T>(k * n, gen);
    const auto c0 = random_vec<T>(m * n, gen);
    const auto expected = reference_gemm(m, n, k, a, ta, b, tb, c0, acc);
    for (Backend be : {Backend::kScalar, Backend::kAvx2}) {
      if (!cpu_supports(be)) continue;
      set_backend(be);
      std::vector<T> c = c0;
      gemm<T>(m, n, k, {a.data(), ta ? m : k, ta}, {b.data(), tb ? k : n, tb}, c.data(), n, acc);
      for (std::size_t i = 0; i < c.size(); ++i)
        REQUIRE(std::abs(static_cast<long double>(c[i]) - expected[i]) <=
                tol * (1.0 + std::sqrt(static_cast<double>(k))));
    }
  }
}

}  // namespace

TEST_CASE("backend selection reports a supported backend") {
  CHECK(cpu_supports(Backend::kScalar));
  CHECK(cpu_supports(active_backend()));
  CHECK(backend_name(Backend::kAvx2) == "avx2");
}

TEST_CASE("gemm variants agree with a long-double reference (float)") {
  check_gemm_equivalence<float>(2e-5);
}

TEST_CASE("gemm variants agree with a long-double reference (double)") {
  check_gemm_equivalence<double>(1e-13);
}

TEST_CASE("scalar and avx2 gemm agree on odd tails") {
  if (!cpu_supports(Backend::kAvx2)) return;
  std::mt19937_64 gen(7);
  for (std::size_t m : {1, 5, 6, 7, 13})
    for (std::size_t n : {1, 3, 8, 15, 16, 17, 33}) {
      const std::size_t k = 9;
      const auto a = random_vec<double>(m * k, gen);
      const auto b = random_vec<double>(k * n, gen);
      std::vector<double> c1(m * n, 5.0), c2(m * n, 5.0);
      scalar::gemm(m, n, k, a.data(), k, b.data(), n, c1.data(), n, false);
      avx2::gemm(m, n, k, a.data(), k, b.data(), n, c2.data(), n, false);
      for (std::size_t i = 0; i < c1.size(); ++i) CHECK(c2[i] == doctest::Approx(c1[i]).epsilon(1e-14));
    }
}

TEST_CASE("gemm with k == 0 clears or keeps C") {
  std::vector<float> c(6, 3.0f);
  gemm<float>(2, 3, 0, {nullptr, 0}, {nullptr, 3}, c.data(), 3, true);
  CHECK(c[0] == 3.0f);
  gemm<float>(2, 3, 0, {nullptr, 0}, {nullptr, 3}, c.data(), 3, false);
  CHECK(c[5] == 0.0f);
}

TEST_CASE("dot and axpy variants agree") {
  std::mt19937_64 gen(3);
  for (std::size_t n : {0, 1, 7, 8, 31, 32, 33, 100, 1000}) {
    const auto x = random_vec<double>(n, gen);
    const auto y = random_vec<double>(n, gen);
    long double ref = 0;
    for (std::size_t i = 0; i < n; ++i) ref += static_cast<long double>(x[i]) * y[i];
    CHECK(std::abs(scalar::dot(x.data(), y.data(), n) - ref) < 1e-12);
    if (cpu_supports(Backend::kAvx2)) {
      CHECK(std::abs(avx2::dot(x.data(), y.data(), n) - ref) < 1e-12);
      const auto xf = random_vec<float>(n, gen);
      const auto yf = random_vec<float>(n, gen);
      CHECK(std::abs(avx2::dot(xf.data(), yf.data(), n) - scalar::dot(xf.data(), yf.data(), n)) <
            1e-4);
      std::vector<double> y1 = y, y2 = y;
      scalar::axpy(0.37, x.data(), y1.data(), n);
      avx2::axpy(0.37, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-15);
    }
  }
}

TEST_CASE("kernels are deterministic run to run") {
  std::mt19937_64 gen(11);
  const std::size_t m = 37, n = 290, k = 301;
  const auto a = random_vec<float>(m * k, gen);
  const auto b = random_vec<float>(k * n, gen);
  std::vector<float> c1(m * n), c2(m * n);
  gemm<float>(m, n, k, {a.data(), k}, {b.data(), n}, c1.data(), n, false);
  gemm<float>(m, n, k, {a.data(), k}, {b.data(), n}, c2.data(), n, false);
  CHECK(c1 == c2);
}
