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

#include "r2s/dsp/stft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "r2s/dsp/fft.hpp"

namespace r2s::dsp {
namespace {

constexpr std::size_t kPad = kFftSize / 2;

// Index into the source signal for position j of the reflect-padded signal.
std::size_t source_index(std::size_t j, std::size_t length) {
  if (j < kPad) return kPad - j;
  const std::size_t i = j - kPad;
  if (i < length) return i;
  return 2 * (length - 1) - i;
}

const std::vector<double>& analysis_window() {
  static const std::vector<double> window = hann_window(kFftSize);
  return window;
}

}  // namespace

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

std::size_t frame_count(std::size_t length) { return length / kHopSize; }

void Spectrogram::validate() const {
  if (n_fft != kFftSize || hop != kHopSize)
    throw std::invalid_argument("spectrogram geometry must be n_fft 512, hop 128");
  if (length < kFftSize) throw std::invalid_argument("spectrogram source length below 512");
  if (frames != frame_count(length))
    throw std::invalid_argument("spectrogram frame count " + std::to_string(frames) +
                                " inconsistent with source length " + std::to_string(length));
  if (bins.size() != frames * bin_count())
    throw std::invalid_argument("spectrogram bin storage does not match frames x 257");
  if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("spectrogram sample rate invalid");
}

Spectrogram stft(const Waveform& w) {
  w.validate();
  if (w.size() < kFftSize)
    throw std::invalid_argument("stft input shorter than 512 samples");
  const std::size_t length = w.size();
  Spectrogram s;
  s.length = length;
  s.sample_rate_hz = w.sample_rate_hz;
  s.frames = frame_count(length);
  s.bins.resize(s.frames * kFreqBins);

  const RealFft fft(kFftSize);
  const auto& window = analysis_window();
  std::vector<double> frame(kFftSize);
  for (std::size_t t = 0; t < s.frames; ++t) {
    const std::size_t start = t * kHopSize;
    for (std::size_t n = 0; n < kFftSize; ++n)
      frame[n] = window[n] * w.samples[source_index(start + n, length)];
    fft.forward(frame, std::span(s.bins).subspan(t * kFreqBins, kFreqBins));
  }
  return s;
}

Waveform istft(const Spectrogram& s) {
  s.validate();
  const std::size_t length = s.length;
  const std::size_t padded = length + 2 * kPad;
  std::vector<double> numer(padded, 0.0);
  std::vector<double> denom(padded, 0.0);

  const RealFft fft(kFftSize);
  const auto& window = analysis_window();
  std::vector<double> frame(kFftSize);
  const double scale = 1.0 / static_cast<double>(kFftSize);
  for (std::size_t t = 0; t < s.frames; ++t) {
    fft.inverse(std::span(s.bins).subspan(t * kFreqBins, kFreqBins), frame);
    const std::size_t start = t * kHopSize;
    for (std::size_t n = 0; n < kFftSize; ++n) {
      numer[start + n] += window[n] * frame[n] * scale;
      denom[start + n] += window[n] * window[n];
    }
  }

  // Fold padded positions back onto the source samples they reflect.
  std::vector<double> num_src(length, 0.0);
  std::vector<double> den_src(length, 0.0);
  for (std::size_t j = 0; j < padded; ++j) {
    const std::size_t i = source_index(j, length);
    num_src[i] += numer[j];
    den_src[i] += denom[j];
  }
  Waveform out;
  out.sample_rate_hz = s.sample_rate_hz;
  out.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i)
    out.samples[i] = den_src[i] > 0.0 ? num_src[i] / den_src[i] : 0.0;
  return out;
}

Magnitude magnitude(const Spectrogram& s) {
  Magnitude m;
  m.frames = s.frames;
  m.bins = s.bin_count();
  m.values.resize(s.bins.size());
  for (std::size_t i = 0; i < s.bins.size(); ++i) m.values[i] = std::abs(s.bins[i]);
  return m;
}

Spectrogram with_phase(const Magnitude& mag, const Spectrogram& phase_source) {
  if (mag.frames != phase_source.frames || mag.bins != phase_source.bin_count())
    throw std::invalid_argument("magnitude and phase spectrogram geometry differ");
  for (double v : mag.values)
    if (!(v >= 0.0)) throw std::invalid_argument("magnitude entries must be non-negative");
  Spectrogram out = phase_source;
  for (std::size_t i = 0; i < out.bins.size(); ++i)
    out.bins[i] = std::polar(mag.values[i], std::arg(phase_source.bins[i]));
  return out;
}

}  // namespace r2s::dsp
