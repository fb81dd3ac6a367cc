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

#include <cstddef>
#include <span>
#include <vector>

namespace r2s::dsp {

struct Biquad {
  double b0, b1, b2, a1, a2;  // a0 normalized to 1
};

/// Even-order Butterworth lowpass as a cascade of bilinear-transform biquads
/// (frequency pre-warped so the -3 dB point lands exactly on `cutoff_hz`).
std::vector<Biquad> butterworth_lowpass(std::size_t order, double cutoff_hz, double sample_rate_hz);

/// Causal direct-form-II-transposed filtering from zero initial state.
std::vector<double> filter(std::span<const Biquad> sections, std::span<const double> x);

/// |H(e^{jw})| at frequency `hz`.
double magnitude_response(std::span<const Biquad> sections, double hz, double sample_rate_hz);

}  // namespace r2s::dsp
