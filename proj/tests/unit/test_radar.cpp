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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>

#include "r2s/dsp/audio_io.hpp"
#include "r2s/dsp/fft.hpp"
#include "r2s/radar/corpus.hpp"
#include "r2s/prng.hpp"
#include "r2s/radar/simulate.hpp"
#include "r2s/radar/speech_synth.hpp"
#include "temp_dir.hpp"

using namespace r2s;
using namespace r2s::radar;
namespace fs = std::filesystem;

namespace {

dsp::Waveform sine(double hz, double seconds, double amp = 1.0) {
  const auto n = static_cast<std::size_t>(seconds * dsp::kSpeechRateHz);
  dsp::Waveform w{std::vector<double>(n), dsp::kSpeechRateHz};
  for (std::size_t i = 0; i < n; ++i)
    w.samples[i] = amp * std::sin(2.0 * std::numbers::pi * hz * i / dsp::kSpeechRateHz);
  return w;
}

RadarConfig noiseless() {
  RadarConfig cfg;
  cfg.phase_noise_std_rad = 0.0;
  return cfg;
}

double rms(const std::vector<double>& x, std::size_t lo = 0) {
  double acc = 0;
  for (std::size_t i = lo; i < x.size(); ++i) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(x.size() - lo));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Fraction of the trace's periodogram energy above `cutoff_hz`.
double energy_above(const std::vector<double>& x, double rate, double cutoff_hz) {
  std::size_t n = 1;
  while (n < x.size()) n *= 2;
  std::vector<double> padded(x);
  padded.resize(n, 0.0);
  const dsp::RealFft fft(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  fft.forward(padded, spec);
  double total = 0, high = 0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double e = std::norm(spec[k]);
    total += e;
    if (k * rate / n > cutoff_hz) high += e;
  }
  return high / total;
}

}  // namespace

TEST_SUITE("simulate") {
  TEST_CASE("silent speech without noise gives an all-zero trace") {
    const dsp::Waveform silent{std::vector<double>(8000, 0.0), dsp::kSpeechRateHz};
    const RfTrace rf = simulate_trace(silent, noiseless());
    CHECK(rf.trace.sample_rate_hz == 5100.0);
    CHECK(rf.trace.size() == 5100);
    for (double v : rf.trace.samples) CHECK(v == 0.0);
  }

  TEST_CASE("100 Hz sine gives phase amplitude 4 pi A / lambda") {
    RadarConfig cfg = noiseless();
    cfg.displacement_gain_m = 5e-6;
    const dsp::Waveform phase = simulate_phase(sine(100.0, 1.0), cfg, "tone");
    // Least-squares fit of a sin + b cos + c over the settled part.
    const double w = 2.0 * std::numbers::pi * 100.0 / 5100.0;
    double ss = 0, cc = 0, sc = 0, s1 = 0, c1 = 0, ys = 0, yc = 0, y1 = 0, n = 0;
    for (std::size_t i = 1000; i < phase.size() - 50; ++i) {
      const double s = std::sin(w * i), c = std::cos(w * i), y = phase.samples[i];
      ss += s * s, cc += c * c, sc += s * c, s1 += s, c1 += c;
      ys += y * s, yc += y * c, y1 += y, n += 1;
    }
    // Solve the 3x3 normal equations by Cramer's rule.
    const double m[3][3] = {{ss, sc, s1}, {sc, cc, c1}, {s1, c1, n}};
    const double r[3] = {ys, yc, y1};
    const auto det = [](const double a[3][3]) {
      return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
             a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
             a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    const double d = det(m);
    double coef[2];
    for (int col = 0; col < 2; ++col) {
      double t[3][3];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t[i][j] = j == col ? r[i] : m[i][j];
      coef[col] = det(t) / d;
    }
    const double amplitude = std::hypot(coef[0], coef[1]);
    CHECK(std::abs(amplitude - 4.0 * std::numbers::pi * 5e-6 / 3.9e-3) < 1e-6);
  }

  TEST_CASE("2 kHz sine is rejected by the perception lowpass") {
    const RadarConfig cfg = noiseless();
    const double low = rms(simulate_phase(sine(100.0, 1.0), cfg, "a").samples, 500);
    const double high = rms(simulate_phase(sine(2000.0, 1.0), cfg, "a").samples, 500);
    MESSAGE("2 kHz / 100 Hz trace rms ratio: " << high / low);
    CHECK(high < 0.05 * low);
  }

  TEST_CASE("noise-free trace is linear in the displacement gain") {
    RadarConfig cfg = noiseless();
    const dsp::Waveform speech = synthesize_speech(3, 1);
    cfg.displacement_gain_m = 2e-6;
    const dsp::Waveform a = simulate_phase(speech, cfg, "x");
    cfg.displacement_gain_m = 4e-6;
    const dsp::Waveform b = simulate_phase(speech, cfg, "x");
    double peak = 0, err = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      peak = std::max(peak, std::abs(b.samples[i]));
      err = std::max(err, std::abs(b.samples[i] - 2.0 * a.samples[i]));
    }
    CHECK(err / peak < 1e-9);
  }

  TEST_CASE("energy above the cutoff stays below 5%") {
    const RadarConfig cfg;
    for (std::uint64_t clip = 0; clip < 8; ++clip) {
      const RfTrace rf = simulate_trace(synthesize_speech(17, clip), cfg, "c" + std::to_string(clip));
      CHECK(energy_above(rf.trace.samples, 5100.0, 1000.0) < 0.05);
    }
  }

  TEST_CASE("input validation") {
    CHECK_THROWS(simulate_trace(sine(100.0, 0.4), RadarConfig{}));
    dsp::Waveform wrong_rate = sine(100.0, 1.0);
    wrong_rate.sample_rate_hz = 16000.0;
    CHECK_THROWS(simulate_trace(wrong_rate, RadarConfig{}));
    RadarConfig bad;
    bad.perception_cutoff_hz = 2550.0;
    CHECK_THROWS(simulate_trace(sine(100.0, 1.0), bad));
    bad = RadarConfig{};
    bad.displacement_gain_m = 0.0;
    CHECK_THROWS(simulate_trace(sine(100.0, 1.0), bad));
  }

  TEST_CASE("noise stream depends on seed and clip id only") {
    const dsp::Waveform speech = synthesize_speech(5, 0);
    RadarConfig cfg;
    const auto a = simulate_trace(speech, cfg, "id").trace.samples;
    CHECK(a == simulate_trace(speech, cfg, "id").trace.samples);
    CHECK(a != simulate_trace(speech, cfg, "other").trace.samples);
    cfg.rng_seed = 99;
    CHECK(a != simulate_trace(speech, cfg, "id").trace.samples);
  }
}

TEST_SUITE("prng") {
  TEST_CASE("counter draws are reproducible and platform-independent") {
    CounterRng a(42, stream_id("clip_000"));
    CounterRng b(42, stream_id("clip_000"));
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    CHECK(a.at(5) == CounterRng(42, stream_id("clip_000")).at(5));
    // SplitMix64 reference value for state 0 advanced once.
    CHECK(CounterRng::mix(CounterRng::kGolden) == 0xE220A8397B1DCDAFull);
    CHECK(stream_id("") == 0xcbf29ce484222325ull);
    CHECK(stream_id("a") == 0xaf63dc4c8601ec8cull);
  }

  TEST_CASE("uniform and normal draws have sane moments") {
    CounterRng rng(7);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double z = rng.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.01);
    for (int i = 0; i < 1000; ++i) {
      const double u = rng.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }
}

TEST_SUITE("corpus") {
  TEST_CASE("10 clips split 0.8/0.2 give 8 train and 2 test") {
    TempDir dir("r2s_corpus_split");
    const auto clips = synthetic_clips(10, 1);
    const CorpusManifest m = build_corpus(clips, dir.path, RadarConfig{}, SplitFractions{});
    CHECK(m.clips.size() == 10);
    CHECK(m.entries("train").size() == 8);
    CHECK(m.entries("test").size() == 2);
    CHECK(m.entries("test")[0]->id == "clip_008");
    for (const auto& e : m.clips) {
      CHECK(fs::exists(clip_dir(dir.path, e) / "speech.wav"));
      CHECK(fs::exists(clip_dir(dir.path, e) / "rf.wav"));
    }
    const CorpusManifest loaded = load_manifest(dir.path);
    CHECK(loaded.clips.size() == 10);
    CHECK(loaded.trace_scale == m.trace_scale);
    const ClipPair pair = load_clip(dir.path, loaded.clips[0]);
    double peak = 0;
    for (const auto& e : loaded.clips)
      for (double v : load_clip(dir.path, e).rf.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(pair.speech.sample_rate_hz == 8000.0);
  }

  TEST_CASE("identical inputs give byte-identical corpora regardless of threads") {
    TempDir a("r2s_corpus_a"), b("r2s_corpus_b");
    const auto clips = synthetic_clips(6, 2);
    build_corpus(clips, a.path, RadarConfig{}, SplitFractions{}, 1);
    build_corpus(clips, b.path, RadarConfig{}, SplitFractions{}, 3);
    std::set<std::string> seen;
    for (const auto& entry : fs::recursive_directory_iterator(a.path)) {
      if (!entry.is_regular_file()) continue;
      const fs::path rel = fs::relative(entry.path(), a.path);
      seen.insert(rel.string());
      CHECK(slurp(entry.path()) == slurp(b.path / rel));
    }
    CHECK(seen.size() == 13);
  }

  TEST_CASE("50 synthetic clips keep speech and RF durations within 10 ms") {
    TempDir dir("r2s_corpus_50");
    const CorpusManifest m = build_corpus(synthetic_clips(50, 3), dir.path, RadarConfig{}, SplitFractions{});
    REQUIRE(m.clips.size() == 50);
    double worst = 0;
    for (const auto& e : m.clips) worst = std::max(worst, std::abs(e.duration_s - e.rf_duration_s));
    MESSAGE("worst duration mismatch (s): " << worst);
    CHECK(worst < 0.010);
  }

  TEST_CASE("speech directory loading skips bad clips and resamples") {
    TempDir dir("r2s_speech_dir");
    fs::create_directories(dir.path);
    dsp::write_wav(dir.path / "good.wav", synthesize_speech(1, 0));
    dsp::write_wav(dir.path / "short.wav", sine(100.0, 0.5, 0.3));
    std::ofstream(dir.path / "broken.wav") << "not a wav";
    const auto clips = load_speech_dir(dir.path);
    REQUIRE(clips.size() == 1);
    CHECK(clips[0].id == "good");

    TempDir empty("r2s_speech_empty");
    fs::create_directories(empty.path);
    CHECK_THROWS(load_speech_dir(empty.path));
  }

  TEST_CASE("duplicate ids are rejected") {
    TempDir dir("r2s_corpus_dup");
    auto clips = synthetic_clips(2, 1);
    clips[1].id = clips[0].id;
    CHECK_THROWS(build_corpus(clips, dir.path, RadarConfig{}, SplitFractions{}));
  }
}
