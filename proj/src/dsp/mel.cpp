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

#include "r2s/dsp/mel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace r2s::dsp {
namespace {

MelFilterbank build_filterbank() {
  MelFilterbank fb;
  fb.weights.assign(kMelBands * kFreqBins, 0.0);
  fb.center_hz.resize(kMelBands);

  const double mel_lo = hz_to_mel(kMelFminHz);
  const double mel_hi = hz_to_mel(kMelFmaxHz);
  std::vector<double> edges_hz(kMelBands + 2);
  for (std::size_t i = 0; i < edges_hz.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(kMelBands + 1);
    edges_hz[i] = mel_to_hz(mel);
  }
  const double bin_hz = kSpeechRateHz / static_cast<double>(kFftSize);
  for (std::size_t m = 0; m < kMelBands; ++m) {
    const double lo = edges_hz[m];
    const double center = edges_hz[m + 1];
    const double hi = edges_hz[m + 2];
    fb.center_hz[m] = center;
    for (std::size_t k = 0; k < kFreqBins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const double rising = (f - lo) / (center - lo);
      const double falling = (hi - f) / (hi - center);
      fb.weights[m * kFreqBins + k] = std::max(0.0, std::min(rising, falling));
    }
  }
  return fb;
}

// Pseudo-inverse [257 x 80], row-major.
const std::vector<double>& filterbank_pinv() {
  static const std::vector<double> pinv = [] {
    const MelFilterbank& fb = mel_filterbank();
    Eigen::MatrixXd a(kMelBands, kFreqBins);
    for (std::size_t m = 0; m < kMelBands; ++m)
      for (std::size_t k = 0; k < kFreqBins; ++k) a(m, k) = fb.at(m, k);
    const Eigen::MatrixXd p = a.completeOrthogonalDecomposition().pseudoInverse();
    std::vector<double> out(kFreqBins * kMelBands);
    for (std::size_t k = 0; k < kFreqBins; ++k)
      for (std::size_t m = 0; m < kMelBands; ++m) out[k * kMelBands + m] = p(k, m);
    return out;
  }();
  return pinv;
}

MelSpectrogram log_mel_from_power(std::size_t frames, const std::vector<double>& power) {
  const MelFilterbank& fb = mel_filterbank();
  MelSpectrogram out;
  out.frames = frames;
  out.values.resize(kMelBands * frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* p = power.data() + t * kFreqBins;
    for (std::size_t m = 0; m < kMelBands; ++m) {
      const double* w = fb.weights.data() + m * kFreqBins;
      double acc = 0.0;
      for (std::size_t k = 0; k < kFreqBins; ++k) acc += w[k] * p[k];
      out.at(m, t) = std::log10(std::max(acc, kPowerFloor));
    }
  }
  return out;
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

const MelFilterbank& mel_filterbank() {
  static const MelFilterbank fb = build_filterbank();
  return fb;
}

MelSpectrogram log_mel(const Spectrogram& s) {
  s.validate();
  if (s.sample_rate_hz != kSpeechRateHz)
    throw std::invalid_argument("log_mel expects an 8 kHz spectrogram");
  std::vector<double> power(s.bins.size());
  for (std::size_t i = 0; i < s.bins.size(); ++i) power[i] = std::norm(s.bins[i]);
  return log_mel_from_power(s.frames, power);
}

MelSpectrogram log_mel(const Magnitude& mag) {
  if (mag.bins != kFreqBins || mag.values.size() != mag.frames * kFreqBins)
    throw std::invalid_argument("magnitude geometry does not match the 257-bin filterbank");
  std::vector<double> power(mag.values.size());
  for (std::size_t i = 0; i < power.size(); ++i) power[i] = mag.values[i] * mag.values[i];
  return log_mel_from_power(mag.frames, power);
}

Magnitude invert_mel(const MelSpectrogram& m) {
  if (m.normalized) throw std::invalid_argument("denormalize first");
  if (m.bands != kMelBands || m.values.size() != m.bands * m.frames)
    throw std::invalid_argument("mel spectrogram geometry invalid");
  const std::vector<double>& pinv = filterbank_pinv();
  Magnitude out;
  out.frames = m.frames;
  out.bins = kFreqBins;
  out.values.assign(m.frames * kFreqBins, 0.0);
  std::vector<double> mel_power(kMelBands);
  for (std::size_t t = 0; t < m.frames; ++t) {
    for (std::size_t b = 0; b < kMelBands; ++b) {
      const double v = m.at(b, t);
      mel_power[b] = v <= kLogFloor ? 0.0 : std::pow(10.0, v);
    }
    for (std::size_t k = 0; k < kFreqBins; ++k) {
      const double* row = pinv.data() + k * kMelBands;
      double acc = 0.0;
      for (std::size_t b = 0; b < kMelBands; ++b) acc += row[b] * mel_power[b];
      out.at(t, k) = std::sqrt(std::max(acc, 0.0));
    }
  }
  return out;
}

}  // namespace r2s::dsp
