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

#include <complex>
#include <cstddef>
#include <span>

namespace r2s::dsp {

/// Real-input FFT of a fixed size backed by FFTW. Plans are created once per
/// size and shared; execution is safe from multiple threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // out[k] = sum_n in[n] exp(-2 pi i k n / N), k = 0..N/2
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;

  // Unnormalized inverse of a Hermitian half spectrum (imaginary parts of the
  // DC and Nyquist bins are ignored); caller divides by N.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace r2s::dsp
