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
#include <vector>

#include "r2s/dsp/waveform.hpp"

namespace r2s::dsp {

inline constexpr std::size_t kFftSize = 512;
inline constexpr std::size_t kHopSize = 128;
inline constexpr std::size_t kFreqBins = kFftSize / 2 + 1;  // 257

/// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

/// Number of analysis frames for a signal of `length` samples. Frames are
/// centred at t * hop for t = 0 .. floor(length / hop) - 1, which keeps every
/// sample under at least three non-zero window taps.
std::size_t frame_count(std::size_t length);

/// One-sided complex STFT, stored frame-major: bins[t * 257 + k].
struct Spectrogram {
  std::vector<std::complex<double>> bins;
  std::size_t frames = 0;
  std::size_t n_fft = kFftSize;
  std::size_t hop = kHopSize;
  double sample_rate_hz = kSpeechRateHz;
  std::size_t length = 0;  // source waveform length in samples

  std::size_t bin_count() const { return n_fft / 2 + 1; }
  std::complex<double>& at(std::size_t t, std::size_t k) { return bins[t * bin_count() + k]; }
  const std::complex<double>& at(std::size_t t, std::size_t k) const {
    return bins[t * bin_count() + k];
  }

  // Throws std::invalid_argument if the geometry fields disagree.
  void validate() const;
};

/// Real magnitude matrix [frames x 257], frame-major.
struct Magnitude {
  std::vector<double> values;
  std::size_t frames = 0;
  std::size_t bins = kFreqBins;

  double& at(std::size_t t, std::size_t k) { return values[t * bins + k]; }
  double at(std::size_t t, std::size_t k) const { return values[t * bins + k]; }
};

/// Hann-windowed 512-point STFT at hop 128 with reflect padding of 256
/// samples on both ends. Requires at least 512 samples.
Spectrogram stft(const Waveform& w);

/// Least-squares inverse of stft(): windowed overlap-add divided by the
/// summed squared window, with the reflected padding folded back onto the
/// samples it copies. Exact inverse of stft() for consistent input.
Waveform istft(const Spectrogram& s);

Magnitude magnitude(const Spectrogram& s);

/// Combines a magnitude with the phase of `phase_source` (same geometry).
Spectrogram with_phase(const Magnitude& mag, const Spectrogram& phase_source);

}  // namespace r2s::dsp
