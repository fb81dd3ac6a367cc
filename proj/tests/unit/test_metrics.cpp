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
#include <cstdint>
#include <numbers>
#include <random>

#include "dsp_oracles.hpp"
#include "r2s/metrics/evaluate.hpp"
#include "r2s/metrics/metrics.hpp"
#include "r2s/radar/corpus.hpp"
#include "r2s/radar/speech_synth.hpp"
#include "temp_dir.hpp"

using namespace r2s;
using metrics::Variant;
using dsp::Waveform;

namespace {

Waveform wave(std::vector<double> samples) { return Waveform{std::move(samples), dsp::kSpeechRateHz}; }

Waveform scaled(const Waveform& w, double k) {
  Waveform out = w;
  for (double& v : out.samples) v *= k;
  return out;
}

Waveform noise(std::size_t n, std::uint64_t seed, double rms) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, rms);
  std::vector<double> x(n);
  for (double& v : x) v = d(gen);
  return wave(std::move(x));
}

double rms(const Waveform& w) {
  double s = 0.0;
  for (double v : w.samples) s += v * v;
  return std::sqrt(s / static_cast<double>(w.size()));
}

// Generator shared with tests/oracles/stoi_reference.py.
struct Lcg {
  std::uint64_t state;
  double next() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }
};

std::vector<double> voiced(std::size_t n, double f0, std::uint64_t seed, bool gaps) {
  Lcg g{seed};
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / 8000.0;
    double env = 0.5 + 0.5 * std::sin(2 * std::numbers::pi * 3.0 * t);
    if (gaps && std::fmod(t, 0.5) > 0.35) env = 0.0;
    double v = 0.0;
    for (int k = 1; k <= 8; ++k) v += std::sin(2 * std::numbers::pi * f0 * k * t + 0.3 * k) / k;
    x[i] = 0.3 * env * v + 0.01 * g.next();
  }
  return x;
}

constexpr std::size_t kPinnedLength = 12000;

struct PinnedPair {
  Waveform ref, est;
  double expected;
};

std::vector<PinnedPair> pinned_pairs() {
  const std::size_t n = kPinnedLength;
  std::vector<PinnedPair> out;
  {
    auto x = voiced(n, 140, 1, false);
    Lcg g{2};
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.2 * g.next();
    out.push_back({wave(x), wave(y), 0.597303682655});
  }
  {
    auto x = voiced(n, 210, 3, true);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 0.5 * (i >= 3 ? x[i - 3] : 0.0);
    out.push_back({wave(x), wave(y), 0.999624624325});
  }
  {
    auto x = voiced(n, 120, 4, false);
    Lcg g{5};
    std::vector<double> y(n);
    for (double& v : y) v = 0.3 * g.next();
    out.push_back({wave(x), wave(y), 0.198724436894});
  }
  return out;
}

}  // namespace

TEST_SUITE("lsd") {
  TEST_CASE("identity and scaling") {
    const Waveform x = noise(4000, 1, 0.1);
    CHECK(metrics::lsd(x, x) == 0.0);
    CHECK(metrics::lsd(x, scaled(x, 10.0)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(metrics::lsd(scaled(x, 10.0), x) == doctest::Approx(2.0).epsilon(1e-12));
    const double k = 3.7;
    CHECK(metrics::lsd(x, scaled(x, k)) == doctest::Approx(std::abs(2.0 * std::log10(k))).epsilon(1e-12));
  }

  TEST_CASE("brute-force oracle on random pairs") {
    std::mt19937_64 gen(2);
    std::uniform_int_distribution<std::size_t> len(560, 1400);
    double worst = 0.0;
    for (int c = 0; c < 120; ++c) {
      const std::size_t n = len(gen);
      const std::size_t m = n - std::uniform_int_distribution<std::size_t>(0, n / 20)(gen);
      const Waveform a = noise(n, 100 + c, 0.3), b = noise(m, 500 + c, 0.05);
      const double got = metrics::lsd(a, b);
      const double want = oracle::lsd(a.samples, b.samples);
      worst = std::max(worst, std::abs(got - want));
      CHECK(got >= 0.0);
    }
    CHECK(worst < 1e-9);
  }

  TEST_CASE("pinned value for two seeded noise clips") {
    auto lcg_noise = [](std::uint64_t seed) {
      Lcg g{seed};
      std::vector<double> x(2048);
      for (double& v : x) v = 0.5 * g.next();
      return wave(std::move(x));
    };
    const Waveform a = lcg_noise(7), b = lcg_noise(8);
    // Value of oracle::lsd(a, b), the direct-DFT reference.
    CHECK(std::abs(metrics::lsd(a, b) - 0.81641496611626907) < 1e-9);
  }

  TEST_CASE("input checks") {
    const Waveform x = noise(4000, 3, 0.1);
    CHECK_NOTHROW(metrics::lsd(x, noise(3700, 4, 0.1)));
    CHECK_THROWS_AS(metrics::lsd(x, noise(3500, 4, 0.1)), std::invalid_argument);
    Waveform radar_rate = x;
    radar_rate.sample_rate_hz = dsp::kRadarRateHz;
    CHECK_THROWS_AS(metrics::lsd(radar_rate, x), std::invalid_argument);
  }
}

TEST_SUITE("stoi") {
  TEST_CASE("resampler matches the Octave-compatible reference") {
    const auto y = metrics::resample_polyphase(voiced(kPinnedLength, 140, 1, false), 10000, 8000);
    REQUIRE(y.size() == 15000);
    CHECK(y[0] == doctest::Approx(0.244695474978516).epsilon(1e-12));
    CHECK(y[777] == doctest::Approx(-0.452805140475537).epsilon(1e-12));
    CHECK(y.back() == doctest::Approx(0.162909559588040).epsilon(1e-12));
    const std::vector<double> x{1.0, 2.0, 3.0};
    CHECK(metrics::resample_polyphase(x, 4, 4) == x);
  }

  TEST_CASE("pinned reference scores") {
    for (const auto& p : pinned_pairs()) CHECK(metrics::stoi(p.ref, p.est) == doctest::Approx(p.expected).epsilon(1e-9));
  }

  TEST_CASE("self-similarity of synthetic speech") {
    for (std::uint64_t i = 0; i < 3; ++i) {
      const Waveform x = radar::synthesize_speech(11, i);
      CHECK(metrics::stoi(x, x) >= 0.999);
    }
  }

  TEST_CASE("monotone in SNR") {
    for (std::uint64_t i = 0; i < 5; ++i) {
      const Waveform x = radar::synthesize_speech(12, i);
      auto noisy = [&](double snr_db) {
        Waveform y = noise(x.size(), 40 + i, rms(x) * std::pow(10.0, -snr_db / 20.0));
        for (std::size_t k = 0; k < x.size(); ++k) y.samples[k] += x.samples[k];
        return metrics::stoi(x, y);
      };
      const double low = noisy(-10.0), high = noisy(10.0);
      INFO("clip " << i << ": -10 dB " << low << ", +10 dB " << high);
      CHECK(low < high);
    }
  }

  TEST_CASE("input checks") {
    CHECK_THROWS_WITH_AS(metrics::stoi(wave(std::vector<double>(8000, 0.0)), noise(8000, 1, 0.1)),
                         "stoi: no active frames", std::invalid_argument);
    CHECK_THROWS_AS(metrics::stoi(noise(3999, 1, 0.1), noise(3999, 2, 0.1)), std::invalid_argument);
    CHECK_THROWS_AS(metrics::stoi(noise(8000, 1, 0.1), noise(7000, 2, 0.1)), std::invalid_argument);
    // A single short burst leaves too few active frames for one segment.
    std::vector<double> burst(8000, 0.0);
    for (std::size_t i = 0; i < 800; ++i) burst[i] = std::sin(0.3 * static_cast<double>(i));
    CHECK_THROWS_AS(metrics::stoi(wave(burst), wave(burst)), std::invalid_argument);
  }
}

TEST_SUITE("evaluate") {
  TEST_CASE("variant names") {
    for (Variant v : metrics::kAllVariants) CHECK(metrics::parse_variant(metrics::variant_name(v)) == v);
    CHECK_THROWS_AS(metrics::parse_variant("pwg"), std::invalid_argument);
  }

  TEST_CASE("summaries use the sorted clip values") {
    metrics::VariantReport r;
    r.clips = {{"b", 1.0, 0.5}, {"a", 3.0, 0.7}};
    metrics::summarize(r);
    CHECK(r.clips.front().id == "a");
    CHECK(r.lsd_mean == 2.0);
    CHECK(r.lsd_std == 1.0);
    CHECK(r.stoi_mean == doctest::Approx(0.6).epsilon(1e-15));
  }

  TEST_CASE("report over a small corpus") {
    TempDir root("r2s_metrics_eval");
    radar::SpeechSynthOptions opts;
    opts.min_duration_s = 1.5;
    opts.max_duration_s = 2.0;
    radar::SplitFractions split;
    split.train = 0.5;
    split.test = 0.5;
    const auto manifest =
        radar::build_corpus(radar::synthetic_clips(4, 31, opts), root.path, radar::RadarConfig{}, split);
    const auto norm = unet::compute_norm_stats(unet::load_mel_pairs(root.path, manifest, "train"));
    unet::RadioUNetConfig model;
    model.base_channels = 4;
    model.token_dim = 16;
    model.heads = 2;
    model.transformer_layers = 1;
    const auto state = unet::init_training_state(model, unet::TrainConfig{}, norm);

    const auto report = metrics::evaluate(root.path, state, metrics::kAllVariants);
    REQUIRE(report.variants.size() == 3);
    const auto test_ids = manifest.entries("test");
    for (const auto& v : report.variants) {
      REQUIRE(v.clips.size() == test_ids.size());
      double lsd_sum = 0.0, stoi_sum = 0.0;
      for (std::size_t i = 0; i < v.clips.size(); ++i) {
        CHECK(v.clips[i].id == test_ids[i]->id);
        CHECK(v.clips[i].lsd >= 0.0);
        lsd_sum += v.clips[i].lsd;
        stoi_sum += v.clips[i].stoi;
      }
      CHECK(std::abs(v.lsd_mean - lsd_sum / static_cast<double>(v.clips.size())) < 1e-9);
      CHECK(std::abs(v.stoi_mean - stoi_sum / static_cast<double>(v.clips.size())) < 1e-9);
    }
    CHECK(report.at(Variant::kCopyInputBaseline).lsd_mean > 0.0);

    const auto again = metrics::evaluate(root.path, state, metrics::kAllVariants, 2);
    CHECK(nlohmann::json(again).dump() == nlohmann::json(report).dump());
    const std::string csv = metrics::report_csv(report);
    CHECK(csv.rfind("metric,griffinlim,istft-rf-phase,copy-input-baseline\nlsd_mean,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

    const Variant only[] = {Variant::kCopyInputBaseline};
    const auto single = metrics::evaluate(root.path, state, only);
    CHECK(single.variants.size() == 1);
    CHECK(single.variants[0].lsd_mean == report.at(Variant::kCopyInputBaseline).lsd_mean);
    CHECK_THROWS_AS(report.at(Variant::kGriffinLim).clips.at(99), std::out_of_range);
    CHECK_THROWS_AS(metrics::evaluate(root.path, state, std::span<const Variant>{}), std::invalid_argument);
  }
}
