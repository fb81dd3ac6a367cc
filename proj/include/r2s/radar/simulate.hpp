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
#include <string>

#include <json.hpp>

#include "r2s/dsp/waveform.hpp"

namespace r2s::radar {

/// Slow-time phase model of a loudspeaker membrane seen by a 77 GHz-class
/// FMCW radar. The slow-time rate is fixed by the hardware at 5.1 kHz.
struct RadarConfig {
  static constexpr double kSlowTimeRateHz = dsp::kRadarRateHz;

  double carrier_wavelength_m = 3.9e-3;
  double perception_cutoff_hz = 1000.0;
  double phase_noise_std_rad = 2e-4;
  double clutter_phase_rad = 0.7;
  double displacement_gain_m = 5e-6;  // peak displacement for unit-peak speech
  std::uint64_t rng_seed = 1234;

  double slow_time_rate_hz() const { return kSlowTimeRateHz; }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

void to_json(nlohmann::json& j, const RadarConfig& cfg);
void from_json(const nlohmann::json& j, RadarConfig& cfg);

struct RfTrace {
  dsp::Waveform trace;  // 5100 Hz
  std::string clip_id;
  RadarConfig config;
};

/// Demodulated slow-time phase before peak normalization: unwrapped phase of
/// (4 pi / lambda) d(t) + clutter + phase noise, minus its mean. d(t) is the
/// 4th-order Butterworth lowpassed speech scaled by the displacement gain and
/// resampled to 5100 Hz. Noise is drawn from the (rng_seed, clip_id) stream.
dsp::Waveform simulate_phase(const dsp::Waveform& speech, const RadarConfig& cfg,
                             const std::string& clip_id);

/// simulate_phase() scaled to unit peak (left at zero when the phase is
/// identically zero).
RfTrace simulate_trace(const dsp::Waveform& speech, const RadarConfig& cfg,
                       const std::string& clip_id = "clip");

}  // namespace r2s::radar
