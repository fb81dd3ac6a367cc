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

#include <cstdint>

#include "r2s/dsp/waveform.hpp"

namespace r2s::radar {

struct SpeechSynthOptions {
  double min_duration_s = 2.0;
  double max_duration_s = 4.0;
  double peak = 0.8;
  // White background noise, RMS relative to `peak`; -inf disables it.
  double noise_floor_db = -70.0;
};

/// Speech-like test signal at 8 kHz: syllables made of an optional
/// high-frequency noise burst (consonant) followed by a harmonic vowel whose
/// partials follow a three-formant envelope and a drifting pitch contour,
/// over a faint white noise floor.
/// Deterministic in (seed, clip_index).
dsp::Waveform synthesize_speech(std::uint64_t seed, std::uint64_t clip_index,
                                const SpeechSynthOptions& options = {});

}  // namespace r2s::radar
