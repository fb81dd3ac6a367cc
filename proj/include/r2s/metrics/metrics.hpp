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

#include "r2s/dsp/waveform.hpp"

namespace r2s::metrics {

/// Power floor applied before the logarithm in lsd().
inline constexpr double kLsdPowerFloor = 1e-10;

/// Log-spectral distance between two 8 kHz waveforms on the 512/128 Hann
/// STFT: mean over frames of the RMS over bins of the log10-power
/// difference. The longer input is trimmed to the shorter one; a length
/// mismatch above 10% throws std::invalid_argument.
double lsd(const dsp::Waveform& ref, const dsp::Waveform& est);

/// Rate of the intelligibility analysis; inputs are resampled to it.
inline constexpr double kStoiRateHz = 10000.0;
/// Frames of 128 samples per intermediate intelligibility segment.
inline constexpr std::size_t kStoiSegmentFrames = 30;

/// Short-time objective intelligibility of `est` against the clean `ref`,
/// both 8 kHz and at least 0.5 s long. Follows the standard formulation:
/// 10 kHz resampling, removal of frames 40 dB below the loudest clean frame,
/// 15 one-third-octave bands from 150 Hz, 30-frame segments and clipped
/// normalized correlation. Lengths are trimmed as in lsd(). Throws
/// std::invalid_argument with "no active frames" for silent references and
/// when fewer than 30 active frames remain.
double stoi(const dsp::Waveform& ref, const dsp::Waveform& est);

/// Octave-compatible polyphase resampler (Kaiser-windowed sinc, 60 dB
/// rejection) by the rational factor up / down. Output length is
/// ceil(n * up / down).
std::vector<double> resample_polyphase(const std::vector<double>& x, std::size_t up,
                                       std::size_t down);

}  // namespace r2s::metrics
