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

#include "r2s/metrics/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "r2s/dsp/fft.hpp"
#include "r2s/dsp/stft.hpp"

namespace r2s::metrics {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

constexpr std::size_t kStoiFrame = 256;
constexpr std::size_t kStoiHop = 128;
constexpr std::size_t kStoiFft = 512;
constexpr std::size_t kStoiBands = 15;
constexpr double kStoiMinCentreHz = 150.0;
constexpr double kStoiDynamicRangeDb = 40.0;
constexpr double kStoiBetaDb = -15.0;
constexpr double kStoiMinSeconds = 0.5;

void check_pair(const dsp::Waveform& ref, const dsp::Waveform& est, const char* what) {
  ref.validate();
  est.validate();
  if (ref.sample_rate_hz != dsp::kSpeechRateHz || est.sample_rate_hz != dsp::kSpeechRateHz)
    throw std::invalid_argument(std::string(what) + " expects 8000 Hz inputs");
  const double longer = static_cast<double>(std::max(ref.size(), est.size()));
  const double diff = static_cast<double>(std::max(ref.size(), est.size()) - std::min(ref.size(), est.size()));
  if (diff > 0.1 * longer)
    throw std::invalid_argument(std::string(what) + ": lengths " + std::to_string(ref.size()) + " and " +
                                std::to_string(est.size()) + " differ by more than 10%");
}

dsp::Waveform trimmed(const dsp::Waveform& w, std::size_t n) {
  dsp::Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples.assign(w.samples.begin(), w.samples.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

// Symmetric Hann of length n without its zero end points.
std::vector<double> inner_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(n + 1));
  return w;
}

// Start offsets of full frames, excluding a frame that ends exactly at the
// signal end.
std::size_t frame_total(std::size_t length) {
  return length > kStoiFrame ? (length - kStoiFrame + kStoiHop - 1) / kStoiHop : 0;
}

// One-third-octave band edges as FFT bin ranges [lo, hi).
struct Band {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

std::array<Band, kStoiBands> third_octave_bands() {
  constexpr std::size_t bins = kStoiFft / 2 + 1;
  auto nearest_bin = [](double hz) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * kStoiRateHz / static_cast<double>(kStoiFft);
      const double d = (f - hz) * (f - hz);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    return best;
  };
  std::array<Band, kStoiBands> bands{};
  for (std::size_t i = 0; i < kStoiBands; ++i) {
    const double k = static_cast<double>(i);
    bands[i].lo = nearest_bin(kStoiMinCentreHz * std::pow(2.0, (2.0 * k - 1.0) / 6.0));
    bands[i].hi = nearest_bin(kStoiMinCentreHz * std::pow(2.0, (2.0 * k + 1.0) / 6.0));
  }
  return bands;
}

// Drops frames of both signals whose clean-signal energy lies more than the
// dynamic range below the loudest clean frame, then overlap-adds the
// remaining windowed frames.
void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
  const std::size_t frames = frame_total(x.size());
  if (frames == 0) throw std::invalid_argument("stoi: no active frames");
  const auto w = inner_hann(kStoiFrame);
  std::vector<double> energy_db(frames);
  double peak_norm = 0.0;
  for (std::size_t f = 0; f < frames; ++f) {
    double sq = 0.0;
    for (std::size_t n = 0; n < kStoiFrame; ++n) {
      const double v = w[n] * x[f * kStoiHop + n];
      sq += v * v;
    }
    peak_norm = std::max(peak_norm, std::sqrt(sq));
    energy_db[f] = 20.0 * std::log10(std::sqrt(sq) + kEps);
  }
  if (peak_norm == 0.0) throw std::invalid_argument("stoi: no active frames");
  const double peak_db = *std::max_element(energy_db.begin(), energy_db.end());

  std::vector<std::size_t> kept;
  for (std::size_t f = 0; f < frames; ++f)
    if (peak_db - kStoiDynamicRangeDb - energy_db[f] < 0.0) kept.push_back(f);
  const std::size_t out_len = (kept.size() - 1) * kStoiHop + kStoiFrame;
  std::vector<double> xo(out_len, 0.0), yo(out_len, 0.0);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const std::size_t src = kept[j] * kStoiHop, dst = j * kStoiHop;
    for (std::size_t n = 0; n < kStoiFrame; ++n) {
      xo[dst + n] += w[n] * x[src + n];
      yo[dst + n] += w[n] * y[src + n];
    }
  }
  x = std::move(xo);
  y = std::move(yo);
}

// Band envelopes [bands x frames]: sqrt of the summed bin power per band.
std::vector<double> band_envelopes(const std::vector<double>& x, std::size_t frames,
                                   const std::array<Band, kStoiBands>& bands) {
  const auto w = inner_hann(kStoiFrame);
  const dsp::RealFft fft(kStoiFft);
  std::vector<double> frame(kStoiFft, 0.0);
  std::vector<std::complex<double>> spec(fft.bins());
  std::vector<double> env(kStoiBands * frames);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t n = 0; n < kStoiFrame; ++n) frame[n] = w[n] * x[f * kStoiHop + n];
    fft.forward(frame, spec);
    for (std::size_t b = 0; b < kStoiBands; ++b) {
      double power = 0.0;
      for (std::size_t k = bands[b].lo; k < bands[b].hi; ++k) power += std::norm(spec[k]);
      env[b * frames + f] = std::sqrt(power);
    }
  }
  return env;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double lsd(const dsp::Waveform& ref, const dsp::Waveform& est) {
  check_pair(ref, est, "lsd");
  const std::size_t n = std::min(ref.size(), est.size());
  const dsp::Spectrogram a = dsp::stft(trimmed(ref, n));
  const dsp::Spectrogram b = dsp::stft(trimmed(est, n));
  const std::size_t bins = a.bin_count();
  double total = 0.0;
  for (std::size_t t = 0; t < a.frames; ++t) {
    double sq = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double la = std::log10(std::max(std::norm(a.at(t, k)), kLsdPowerFloor));
      const double lb = std::log10(std::max(std::norm(b.at(t, k)), kLsdPowerFloor));
      sq += (la - lb) * (la - lb);
    }
    total += std::sqrt(sq / static_cast<double>(bins));
  }
  return total / static_cast<double>(a.frames);
}

std::vector<double> resample_polyphase(const std::vector<double>& x, std::size_t up, std::size_t down) {
  if (up == 0 || down == 0) throw std::invalid_argument("resample_polyphase: zero rate factor");
  const std::size_t g = std::gcd(up, down);
  up /= g;
  down /= g;
  if (up == 1 && down == 1) return x;

  // Kaiser-windowed ideal low-pass at the tighter of the two Nyquist limits.
  const double cutoff = 1.0 / (2.0 * static_cast<double>(std::max(up, down)));
  const double rejection_db = 60.0;
  const auto half = static_cast<std::size_t>(std::ceil((rejection_db - 8.0) / (28.714 * cutoff / 10.0)));
  const double beta = 0.1102 * (rejection_db - 8.7);
  const std::size_t taps = 2 * half + 1;
  std::vector<double> h(taps);
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  for (std::size_t i = 0; i < taps; ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(half);
    const double arg = 2.0 * cutoff * t;
    const double sinc = arg == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    const double r = 2.0 * static_cast<double>(i) / static_cast<double>(taps - 1) - 1.0;
    const double kaiser = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[i] = kaiser * 2.0 * static_cast<double>(up) * cutoff * sinc;
  }
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (double& v : h) v = v / sum * static_cast<double>(up);

  // Output n sits at input time n * down / up, the filter centred on it.
  const std::size_t n_out = (x.size() * up + down - 1) / down;
  std::vector<double> y(n_out, 0.0);
  const auto ih = static_cast<std::ptrdiff_t>(half);
  for (std::size_t n = 0; n < n_out; ++n) {
    const auto centre = static_cast<std::ptrdiff_t>(n * down) + ih;  // tap index for input m: centre - m*up
    const std::ptrdiff_t m_lo = std::max<std::ptrdiff_t>(0, (centre - static_cast<std::ptrdiff_t>(taps) + static_cast<std::ptrdiff_t>(up)) / static_cast<std::ptrdiff_t>(up));
    const std::ptrdiff_t m_hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(x.size()) - 1, centre / static_cast<std::ptrdiff_t>(up));
    double acc = 0.0;
    for (std::ptrdiff_t m = m_lo; m <= m_hi; ++m) {
      const std::ptrdiff_t j = centre - m * static_cast<std::ptrdiff_t>(up);
      if (j >= 0 && j < static_cast<std::ptrdiff_t>(taps)) acc += h[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(m)];
    }
    y[n] = acc;
  }
  return y;
}

double stoi(const dsp::Waveform& ref, const dsp::Waveform& est) {
  check_pair(ref, est, "stoi");
  const std::size_t n = std::min(ref.size(), est.size());
  if (static_cast<double>(n) < kStoiMinSeconds * dsp::kSpeechRateHz)
    throw std::invalid_argument("stoi: inputs shorter than 0.5 s");

  constexpr auto up = static_cast<std::size_t>(kStoiRateHz);
  constexpr auto down = static_cast<std::size_t>(dsp::kSpeechRateHz);
  std::vector<double> x = resample_polyphase(trimmed(ref, n).samples, up, down);
  std::vector<double> y = resample_polyphase(trimmed(est, n).samples, up, down);
  remove_silent_frames(x, y);

  const std::size_t frames = frame_total(x.size());
  if (frames < kStoiSegmentFrames)
    throw std::invalid_argument("stoi: " + std::to_string(frames) + " active frames, at least " +
                                std::to_string(kStoiSegmentFrames) + " required");
  static const auto bands = third_octave_bands();
  const auto xe = band_envelopes(x, frames, bands);
  const auto ye = band_envelopes(y, frames, bands);

  const double clip = 1.0 + std::pow(10.0, -kStoiBetaDb / 20.0);
  constexpr std::size_t len = kStoiSegmentFrames;
  const std::size_t segments = frames - len + 1;
  std::array<double, len> xs{}, ys{};
  double total = 0.0;
  for (std::size_t s = 0; s < segments; ++s) {
    for (std::size_t b = 0; b < kStoiBands; ++b) {
      std::copy_n(xe.begin() + static_cast<std::ptrdiff_t>(b * frames + s), len, xs.begin());
      std::copy_n(ye.begin() + static_cast<std::ptrdiff_t>(b * frames + s), len, ys.begin());
      const double scale = norm2(xs) / (norm2(ys) + kEps);
      for (std::size_t i = 0; i < len; ++i) ys[i] = std::min(ys[i] * scale, xs[i] * clip);
      const double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / len;
      const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / len;
      for (std::size_t i = 0; i < len; ++i) {
        xs[i] -= xm;
        ys[i] -= ym;
      }
      const double xn = norm2(xs) + kEps, yn = norm2(ys) + kEps;
      double dot = 0.0;
      for (std::size_t i = 0; i < len; ++i) dot += (xs[i] / xn) * (ys[i] / yn);
      total += dot;
    }
  }
  return total / static_cast<double>(segments * kStoiBands);
}

}  // namespace r2s::metrics
