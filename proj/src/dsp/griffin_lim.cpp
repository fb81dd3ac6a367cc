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

#include "r2s/dsp/griffin_lim.hpp"

#include <cmath>
#include <stdexcept>

namespace r2s::dsp {
namespace {

double bin_weight(std::size_t k) { return (k == 0 || k == kFreqBins - 1) ? 1.0 : 2.0; }

double gap_of(const Magnitude& target, const Spectrogram& analysis) {
  double acc = 0.0;
  for (std::size_t t = 0; t < target.frames; ++t)
    for (std::size_t k = 0; k < kFreqBins; ++k) {
      const double d = std::abs(analysis.at(t, k)) - target.at(t, k);
      acc += bin_weight(k) * d * d;
    }
  return std::sqrt(acc);
}

Spectrogram empty_geometry(std::size_t frames) {
  Spectrogram s;
  s.frames = frames;
  s.length = frames * kHopSize;
  s.sample_rate_hz = kSpeechRateHz;
  s.bins.assign(frames * kFreqBins, {0.0, 0.0});
  return s;
}

}  // namespace

double consistency_gap(const Magnitude& target, const Waveform& x) {
  const Spectrogram analysis = stft(x);
  if (analysis.frames != target.frames)
    throw std::invalid_argument("consistency_gap: frame count mismatch");
  return gap_of(target, analysis);
}

GriffinLimResult griffin_lim_traced(const Magnitude& mag, std::size_t iters) {
  if (iters < 1) throw std::invalid_argument("griffin_lim needs at least one iteration");
  if (mag.bins != kFreqBins || mag.values.size() != mag.frames * kFreqBins)
    throw std::invalid_argument("griffin_lim magnitude geometry invalid");
  if (mag.frames * kHopSize < kFftSize)
    throw std::invalid_argument("griffin_lim needs at least 4 frames");
  for (double v : mag.values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("griffin_lim magnitudes must be non-negative and finite");

  Spectrogram estimate = empty_geometry(mag.frames);
  for (std::size_t i = 0; i < mag.values.size(); ++i) estimate.bins[i] = {mag.values[i], 0.0};

  GriffinLimResult result;
  result.gaps.reserve(iters + 1);
  Waveform x = istft(estimate);
  for (std::size_t it = 0; it < iters; ++it) {
    const Spectrogram analysis = stft(x);
    result.gaps.push_back(gap_of(mag, analysis));
    estimate = with_phase(mag, analysis);
    x = istft(estimate);
  }
  result.gaps.push_back(gap_of(mag, stft(x)));
  result.waveform = std::move(x);
  return result;
}

Waveform griffin_lim(const Magnitude& mag, std::size_t iters) {
  return griffin_lim_traced(mag, iters).waveform;
}

}  // namespace r2s::dsp
