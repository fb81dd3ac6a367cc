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
#include <vector>

#include "r2s/dsp/stft.hpp"

namespace r2s::dsp {

inline constexpr std::size_t kGriffinLimIters = 32;

struct GriffinLimResult {
  Waveform waveform;
  // Spectral consistency gap || |stft(x_i)| - target || for the initial
  // zero-phase estimate and after every iteration (iters + 1 entries).
  std::vector<double> gaps;
};

/// Consistency gap between a target magnitude and the re-analysis magnitude
/// of `x`, in the two-sided spectrum norm (bins 1..255 counted twice).
double consistency_gap(const Magnitude& target, const Waveform& x);

/// Phase retrieval by alternating projections, starting from zero phase.
/// The output has frames * 128 samples at 8 kHz.
GriffinLimResult griffin_lim_traced(const Magnitude& mag, std::size_t iters = kGriffinLimIters);

Waveform griffin_lim(const Magnitude& mag, std::size_t iters = kGriffinLimIters);

}  // namespace r2s::dsp
