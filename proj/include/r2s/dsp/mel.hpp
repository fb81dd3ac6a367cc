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

inline constexpr std::size_t kMelBands = 80;
inline constexpr double kMelFminHz = 60.0;
inline constexpr double kMelFmaxHz = 4000.0;
inline constexpr double kPowerFloor = 1e-10;
inline constexpr double kLogFloor = -10.0;  // log10(kPowerFloor)

/// HTK mel scale: 2595 log10(1 + f / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// 80 triangular filters on an HTK mel axis spanning 60-4000 Hz for a
/// 512-point FFT at 8 kHz. Row-major [80 x 257], unit-peak triangles.
struct MelFilterbank {
  std::vector<double> weights;
  std::vector<double> center_hz;  // 80 entries, ascending

  double at(std::size_t band, std::size_t bin) const { return weights[band * kFreqBins + bin]; }
};

/// Shared read-only filterbank, built on first use.
const MelFilterbank& mel_filterbank();

/// Log10-power Mel matrix stored band-major: values[band * frames + t].
struct MelSpectrogram {
  std::vector<double> values;
  std::size_t bands = kMelBands;
  std::size_t frames = 0;
  double fmin_hz = kMelFminHz;
  double fmax_hz = kMelFmaxHz;
  bool normalized = false;

  double& at(std::size_t band, std::size_t t) { return values[band * frames + t]; }
  double at(std::size_t band, std::size_t t) const { return values[band * frames + t]; }
};

/// log10(max(filterbank * |X|^2, 1e-10)) per frame.
MelSpectrogram log_mel(const Spectrogram& s);

/// Same as log_mel() but from a magnitude matrix.
MelSpectrogram log_mel(const Magnitude& mag);

/// Clamped pseudo-inverse of the filterbank applied to the linear Mel power of
/// each frame, then a square root. Entries at the log floor map to zero power.
/// Throws "denormalize first" for normalized input.
Magnitude invert_mel(const MelSpectrogram& m);

}  // namespace r2s::dsp
