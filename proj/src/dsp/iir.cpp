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

#include "r2s/dsp/iir.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace r2s::dsp {

std::vector<Biquad> butterworth_lowpass(std::size_t order, double cutoff_hz,
                                        double sample_rate_hz) {
  if (order == 0 || order % 2 != 0)
    throw std::invalid_argument("butterworth order must be even and positive");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0))
    throw std::invalid_argument("butterworth cutoff must lie in (0, fs/2)");
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate_hz;
  const double cw = std::cos(w0);
  const double sw = std::sin(w0);
  std::vector<Biquad> sections;
  for (std::size_t k = 0; k < order / 2; ++k) {
    // Pole-pair quality factors of the analog prototype.
    const double angle = std::numbers::pi * static_cast<double>(2 * k + 1) /
                         static_cast<double>(2 * order);
    const double q = 1.0 / (2.0 * std::sin(angle));
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    sections.push_back({(1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0,
                        -2.0 * cw / a0, (1.0 - alpha) / a0});
  }
  return sections;
}

std::vector<double> filter(std::span<const Biquad> sections, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const Biquad& s : sections) {
    double z1 = 0.0;
    double z2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

double magnitude_response(std::span<const Biquad> sections, double hz, double sample_rate_hz) {
  const std::complex<double> z =
      std::polar(1.0, -2.0 * std::numbers::pi * hz / sample_rate_hz);  // z^-1
  std::complex<double> h(1.0, 0.0);
  for (const Biquad& s : sections)
    h *= (s.b0 + s.b1 * z + s.b2 * z * z) / (1.0 + s.a1 * z + s.a2 * z * z);
  return std::abs(h);
}

}  // namespace r2s::dsp
