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

#include "r2s/dsp/waveform.hpp"

#include <cmath>
#include <stdexcept>

namespace r2s::dsp {

void Waveform::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
    throw std::invalid_argument("waveform sample rate must be positive");
  if (samples.empty()) throw std::invalid_argument("waveform is empty");
  for (double s : samples)
    if (!std::isfinite(s)) throw std::invalid_argument("waveform contains non-finite samples");
}

Waveform resample_cubic_spline(const Waveform& w, double target_rate_hz) {
  if (!(target_rate_hz > 0.0)) throw std::invalid_argument("target rate must be positive");
  if (w.size() < 4) throw std::invalid_argument("input too short for cubic spline");
  w.validate();

  const std::size_t n = w.size();
  const std::vector<double>& y = w.samples;

  // Second derivatives on a unit-spaced knot grid; natural ends (M0 = Mn-1 = 0).
  // Interior equations: M[i-1] + 4 M[i] + M[i+1] = 6 (y[i-1] - 2 y[i] + y[i+1]),
  // solved with the Thomas algorithm.
  std::vector<double> second(n, 0.0);
  const std::size_t interior = n - 2;
  std::vector<double> c_prime(interior, 0.0);
  std::vector<double> d_prime(interior, 0.0);
  for (std::size_t i = 0; i < interior; ++i) {
    const double rhs = 6.0 * (y[i] - 2.0 * y[i + 1] + y[i + 2]);
    if (i == 0) {
      c_prime[i] = 1.0 / 4.0;
      d_prime[i] = rhs / 4.0;
    } else {
      const double denom = 4.0 - c_prime[i - 1];
      c_prime[i] = 1.0 / denom;
      d_prime[i] = (rhs - d_prime[i - 1]) / denom;
    }
  }
  for (std::size_t i = interior; i-- > 0;) {
    second[i + 1] = d_prime[i] - (i + 1 < interior ? c_prime[i] * second[i + 2] : 0.0);
  }

  const double ratio = w.sample_rate_hz / target_rate_hz;
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * target_rate_hz / w.sample_rate_hz));
  Waveform out;
  out.sample_rate_hz = target_rate_hz;
  out.samples.resize(out_len);
  for (std::size_t j = 0; j < out_len; ++j) {
    const double x = static_cast<double>(j) * ratio;
    // Segment index clamped so positions past the last knot extrapolate the
    // final cubic piece.
    auto seg = static_cast<std::size_t>(std::floor(x));
    if (seg > n - 2) seg = n - 2;
    const double t = x - static_cast<double>(seg);
    const double a = 1.0 - t;
    const double m0 = second[seg];
    const double m1 = second[seg + 1];
    out.samples[j] = a * y[seg] + t * y[seg + 1] +
                     ((a * a * a - a) * m0 + (t * t * t - t) * m1) / 6.0;
  }
  return out;
}

}  // namespace r2s::dsp
