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

#include "r2s/radar/speech_synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "r2s/prng.hpp"

namespace r2s::radar {
namespace {

struct Vowel {
  std::array<double, 3> formant_hz;
  std::array<double, 3> bandwidth_hz;
};

// Peterson & Barney style averages for adult speakers.
constexpr std::array<Vowel, 6> kVowels = {{
    {{730, 1090, 2440}, {90, 110, 170}},  // a
    {{270, 2290, 3010}, {60, 100, 180}},  // i
    {{300, 870, 2240}, {60, 90, 170}},    // u
    {{530, 1840, 2480}, {70, 110, 170}},  // e
    {{570, 840, 2410}, {80, 90, 170}},    // o
    {{660, 1720, 2410}, {90, 110, 170}},  // ae
}};

constexpr std::uint64_t kSpeechStream = 0x5350454543480000ull;  // "SPEECH"

double formant_envelope(const Vowel& v, double hz) {
  constexpr std::array<double, 3> kGain = {1.0, 0.6, 0.35};
  double env = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double z = (hz - v.formant_hz[i]) / v.bandwidth_hz[i];
    env += kGain[i] / (1.0 + z * z);
  }
  // Glottal spectral tilt.
  return env / (1.0 + hz / 1500.0);
}

double ramp(std::size_t i, std::size_t n, std::size_t edge) {
  const std::size_t e = std::min(edge, n / 2);
  if (e == 0) return 1.0;
  if (i < e) return 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / e);
  if (i >= n - e)
    return 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(n - 1 - i) / e);
  return 1.0;
}

}  // namespace

dsp::Waveform synthesize_speech(std::uint64_t seed, std::uint64_t clip_index,
                                const SpeechSynthOptions& options) {
  if (!(options.min_duration_s > 0.0) || options.max_duration_s < options.min_duration_s)
    throw std::invalid_argument("invalid synthetic speech duration range");
  constexpr double fs = dsp::kSpeechRateHz;
  CounterRng rng(seed, kSpeechStream + clip_index);

  const double duration = rng.uniform(options.min_duration_s, options.max_duration_s);
  const auto total = static_cast<std::size_t>(std::llround(duration * fs));
  std::vector<double> out(total, 0.0);

  const double speaker_f0 = rng.uniform(95.0, 230.0);
  std::size_t pos = static_cast<std::size_t>(rng.uniform(0.05, 0.15) * fs);
  double glottal_phase = 0.0;

  while (pos < total) {
    // Consonant: differentiated white noise, energy concentrated at 2-4 kHz.
    if (rng.uniform() < 0.6) {
      const auto n = static_cast<std::size_t>(rng.uniform(0.03, 0.09) * fs);
      const double level = rng.uniform(0.05, 0.2);
      double prev = 0.0;
      for (std::size_t i = 0; i < n && pos < total; ++i, ++pos) {
        const double w = rng.normal();
        out[pos] += level * 0.5 * (w - prev) * ramp(i, n, 40);
        prev = w;
      }
    }
    if (pos >= total) break;

    // Vowel with a pitch glide; partials up to 3.9 kHz.
    const Vowel& vowel = kVowels[rng.index(kVowels.size())];
    const auto n = static_cast<std::size_t>(rng.uniform(0.12, 0.35) * fs);
    const double level = rng.uniform(0.5, 1.0);
    const double glide = rng.uniform(-0.15, 0.15);
    const double vibrato_hz = rng.uniform(3.0, 6.0);
    const double f0_start = speaker_f0 * rng.uniform(0.9, 1.1);
    for (std::size_t i = 0; i < n && pos < total; ++i, ++pos) {
      const double u = static_cast<double>(i) / static_cast<double>(n);
      const double f0 = f0_start * (1.0 + glide * u) *
                        (1.0 + 0.02 * std::sin(2.0 * std::numbers::pi * vibrato_hz * i / fs));
      glottal_phase += 2.0 * std::numbers::pi * f0 / fs;
      if (glottal_phase > 2.0 * std::numbers::pi * 1e3)
        glottal_phase = std::fmod(glottal_phase, 2.0 * std::numbers::pi);
      double sample = 0.0;
      for (int h = 1;; ++h) {
        const double hz = h * f0;
        if (hz >= 3900.0) break;
        sample += formant_envelope(vowel, hz) * std::sin(h * glottal_phase);
      }
      out[pos] += level * sample * ramp(i, n, 160);
    }
    pos += static_cast<std::size_t>(rng.uniform(0.0, 0.08) * fs);
  }

  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : out) v *= options.peak / peak;

  // Recording noise floor; pauses are never digitally silent.
  if (std::isfinite(options.noise_floor_db)) {
    const double sigma = options.peak * std::pow(10.0, options.noise_floor_db / 20.0);
    for (double& v : out) v += sigma * rng.normal();
  }
  return dsp::Waveform{std::move(out), fs};
}

}  // namespace r2s::radar
