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

namespace r2s::dsp {

inline constexpr double kSpeechRateHz = 8000.0;
inline constexpr double kRadarRateHz = 5100.0;

/// Real sample sequence with its sampling rate. Carries both speech audio
/// and radar slow-time traces.
struct Waveform {
  std::vector<double> samples;
  double sample_rate_hz = kSpeechRateHz;

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }

  // Throws std::invalid_argument on a non-positive rate, empty samples, or
  // non-finite values.
  void validate() const;
};

/// Cubic-spline resampling (natural boundary conditions) onto a uniform grid
/// at `target_rate_hz`. Output length is round(len * target / source).
Waveform resample_cubic_spline(const Waveform& w, double target_rate_hz);

}  // namespace r2s::dsp
