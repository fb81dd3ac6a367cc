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

#include "r2s/radar/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "r2s/dsp/iir.hpp"
#include "r2s/prng.hpp"

namespace r2s::radar {
namespace {

constexpr double kMinSpeechSeconds = 0.5;
constexpr std::size_t kLowpassOrder = 4;

std::vector<double> unwrap(const std::vector<double>& wrapped) {
  std::vector<double> out(wrapped.size());
  if (wrapped.empty()) return out;
  constexpr double kPi = std::numbers::pi;
  double offset = 0.0;
  out[0] = wrapped[0];
  for (std::size_t i = 1; i < wrapped.size(); ++i) {
    const double d = wrapped[i] - wrapped[i - 1];
    if (std::abs(d) >= kPi) {
      double dmod = std::fmod(d + kPi, 2.0 * kPi);
      if (dmod < 0.0) dmod += 2.0 * kPi;
      dmod -= kPi;
      if (dmod == -kPi && d > 0.0) dmod = kPi;
      offset += dmod - d;
    }
    out[i] = wrapped[i] + offset;
  }
  return out;
}

}  // namespace

void RadarConfig::validate() const {
  if (!(carrier_wavelength_m > 0.0))
    throw std::invalid_argument("radar.carrier_wavelength_m must be positive");
  if (!(perception_cutoff_hz > 0.0) || !(perception_cutoff_hz < kSlowTimeRateHz / 2.0))
    throw std::invalid_argument("radar.perception_cutoff_hz must lie in (0, 2550)");
  if (!(phase_noise_std_rad >= 0.0) || !std::isfinite(phase_noise_std_rad))
    throw std::invalid_argument("radar.phase_noise_std_rad must be >= 0");
  if (!std::isfinite(clutter_phase_rad))
    throw std::invalid_argument("radar.clutter_phase_rad must be finite");
  if (!(displacement_gain_m > 0.0))
    throw std::invalid_argument("radar.displacement_gain_m must be positive");
}

void to_json(nlohmann::json& j, const RadarConfig& cfg) {
  j = nlohmann::json{{"slow_time_rate_hz", cfg.slow_time_rate_hz()},
                     {"carrier_wavelength_m", cfg.carrier_wavelength_m},
                     {"perception_cutoff_hz", cfg.perception_cutoff_hz},
                     {"phase_noise_std_rad", cfg.phase_noise_std_rad},
                     {"clutter_phase_rad", cfg.clutter_phase_rad},
                     {"displacement_gain_m", cfg.displacement_gain_m},
                     {"rng_seed", cfg.rng_seed}};
}

void from_json(const nlohmann::json& j, RadarConfig& cfg) {
  if (j.contains("slow_time_rate_hz") &&
      j.at("slow_time_rate_hz").get<double>() != RadarConfig::kSlowTimeRateHz)
    throw std::invalid_argument("radar.slow_time_rate_hz is fixed at 5100");
  cfg.carrier_wavelength_m = j.at("carrier_wavelength_m").get<double>();
  cfg.perception_cutoff_hz = j.at("perception_cutoff_hz").get<double>();
  cfg.phase_noise_std_rad = j.at("phase_noise_std_rad").get<double>();
  cfg.clutter_phase_rad = j.at("clutter_phase_rad").get<double>();
  cfg.displacement_gain_m = j.at("displacement_gain_m").get<double>();
  cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
}

dsp::Waveform simulate_phase(const dsp::Waveform& speech, const RadarConfig& cfg,
                             const std::string& clip_id) {
  cfg.validate();
  speech.validate();
  if (speech.sample_rate_hz != dsp::kSpeechRateHz)
    throw std::invalid_argument("simulate_trace expects 8000 Hz speech");
  if (speech.duration_s() < kMinSpeechSeconds)
    throw std::invalid_argument("speech shorter than 0.5 s");

  const auto sections =
      dsp::butterworth_lowpass(kLowpassOrder, cfg.perception_cutoff_hz, speech.sample_rate_hz);
  dsp::Waveform displacement;
  displacement.sample_rate_hz = speech.sample_rate_hz;
  displacement.samples = dsp::filter(sections, speech.samples);
  for (double& v : displacement.samples) v *= cfg.displacement_gain_m;
  const dsp::Waveform slow = dsp::resample_cubic_spline(displacement, cfg.slow_time_rate_hz());

  CounterRng rng(cfg.rng_seed, stream_id(clip_id));
  const double k = 4.0 * std::numbers::pi / cfg.carrier_wavelength_m;
  std::vector<double> wrapped(slow.size());
  for (std::size_t i = 0; i < slow.size(); ++i) {
    double phase = k * slow.samples[i] + cfg.clutter_phase_rad;
    if (cfg.phase_noise_std_rad > 0.0) phase += cfg.phase_noise_std_rad * rng.normal();
    wrapped[i] = std::atan2(std::sin(phase), std::cos(phase));
  }
  std::vector<double> phase = unwrap(wrapped);
  // Reference to the first sample before removing the mean so a constant
  // phase maps to exact zeros.
  const double first = phase.front();
  for (double& v : phase) v -= first;
  double mean = 0.0;
  for (double v : phase) mean += v;
  mean /= static_cast<double>(phase.size());
  for (double& v : phase) v -= mean;

  dsp::Waveform out;
  out.sample_rate_hz = cfg.slow_time_rate_hz();
  out.samples = std::move(phase);
  return out;
}

RfTrace simulate_trace(const dsp::Waveform& speech, const RadarConfig& cfg,
                       const std::string& clip_id) {
  RfTrace rf{simulate_phase(speech, cfg, clip_id), clip_id, cfg};
  double peak = 0.0;
  for (double v : rf.trace.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : rf.trace.samples) v /= peak;
  return rf;
}

}  // namespace r2s::radar
