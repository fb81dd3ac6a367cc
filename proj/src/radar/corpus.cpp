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

#include "r2s/radar/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "r2s/dsp/audio_io.hpp"
#include "r2s/dsp/iir.hpp"
#include "r2s/log.hpp"
#include "r2s/parallel.hpp"

namespace r2s::radar {
namespace fs = std::filesystem;
namespace {

constexpr double kMinClipSeconds = 1.0;
constexpr double kMaxClipSeconds = 10.0;

dsp::Waveform to_speech_rate(const dsp::Waveform& w) {
  if (w.sample_rate_hz == dsp::kSpeechRateHz) return w;
  dsp::Waveform src = w;
  if (w.sample_rate_hz > dsp::kSpeechRateHz) {
    const auto aa = dsp::butterworth_lowpass(8, 0.475 * dsp::kSpeechRateHz, w.sample_rate_hz);
    src.samples = dsp::filter(aa, w.samples);
  }
  return dsp::resample_cubic_spline(src, dsp::kSpeechRateHz);
}

}  // namespace

std::vector<const ManifestEntry*> CorpusManifest::entries(const std::string& split_name) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : clips)
    if (e.split == split_name) out.push_back(&e);
  return out;
}

void to_json(nlohmann::json& j, const CorpusManifest& m) {
  nlohmann::json clips = nlohmann::json::array();
  for (const auto& e : m.clips)
    clips.push_back({{"id", e.id},
                     {"duration_s", e.duration_s},
                     {"rf_duration_s", e.rf_duration_s},
                     {"split", e.split}});
  j = nlohmann::json{{"format", "r2s-corpus-1"},
                     {"radar", m.radar},
                     {"split", {{"train", m.split.train}, {"test", m.split.test}}},
                     {"trace_scale", m.trace_scale},
                     {"clips", clips}};
}

void from_json(const nlohmann::json& j, CorpusManifest& m) {
  if (j.value("format", "") != "r2s-corpus-1")
    throw std::runtime_error("manifest format tag missing or unknown");
  m.radar = j.at("radar").get<RadarConfig>();
  m.split.train = j.at("split").at("train").get<double>();
  m.split.test = j.at("split").at("test").get<double>();
  m.trace_scale = j.at("trace_scale").get<double>();
  m.clips.clear();
  for (const auto& c : j.at("clips"))
    m.clips.push_back({c.at("id").get<std::string>(), c.at("duration_s").get<double>(),
                       c.at("rf_duration_s").get<double>(), c.at("split").get<std::string>()});
}

fs::path clip_dir(const fs::path& root, const ManifestEntry& entry) {
  return root / entry.split / entry.id;
}

std::vector<std::string> assign_splits(std::span<const std::string> sorted_ids,
                                       const SplitFractions& split) {
  if (split.train < 0.0 || split.test < 0.0 || std::abs(split.train + split.test - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must be non-negative and sum to 1");
  const std::size_t n = sorted_ids.size();
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * split.test));
  std::vector<std::string> out(n, "train");
  for (std::size_t i = n - std::min(n, n_test); i < n; ++i) out[i] = "test";
  return out;
}

CorpusManifest build_corpus(std::span<const CorpusClip> clips, const fs::path& root,
                            const RadarConfig& cfg, const SplitFractions& split,
                            std::size_t threads) {
  cfg.validate();
  if (clips.empty()) throw std::invalid_argument("corpus has no clips");

  std::vector<std::size_t> order(clips.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return clips[a].id < clips[b].id; });
  std::vector<std::string> ids;
  for (std::size_t i : order) ids.push_back(clips[i].id);
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::invalid_argument("duplicate clip id in corpus");
  const std::vector<std::string> splits = assign_splits(ids, split);

  std::vector<dsp::Waveform> speech(order.size());
  std::vector<dsp::Waveform> phase(order.size());
  parallel_for(order.size(), threads, [&](std::size_t i) {
    const CorpusClip& clip = clips[order[i]];
    speech[i] = to_speech_rate(clip.speech);
    phase[i] = simulate_phase(speech[i], cfg, clip.id);
  });

  double peak = 0.0;
  for (const auto& p : phase)
    for (double v : p.samples) peak = std::max(peak, std::abs(v));
  const double scale = peak > 0.0 ? 1.0 / peak : 1.0;

  CorpusManifest manifest;
  manifest.radar = cfg;
  manifest.split = split;
  manifest.trace_scale = scale;
  fs::create_directories(root);
  for (std::size_t i = 0; i < order.size(); ++i) {
    ManifestEntry entry{ids[i], speech[i].duration_s(), 0.0, splits[i]};
    for (double& v : phase[i].samples) v *= scale;
    entry.rf_duration_s = phase[i].duration_s();
    const fs::path dir = clip_dir(root, entry);
    fs::create_directories(dir);
    dsp::write_wav(dir / "speech.wav", speech[i]);
    dsp::write_wav(dir / "rf.wav", phase[i]);
    manifest.clips.push_back(std::move(entry));
  }

  std::ofstream out(root / "manifest.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (root / "manifest.json").string());
  out << nlohmann::json(manifest).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + (root / "manifest.json").string());
  return manifest;
}

std::vector<CorpusClip> load_speech_dir(const fs::path& speech_dir) {
  if (!fs::is_directory(speech_dir))
    throw std::runtime_error("speech directory not found: " + speech_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(speech_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<CorpusClip> clips;
  for (const auto& path : files) {
    try {
      dsp::Waveform w = dsp::read_wav(path);
      const double d = w.duration_s();
      if (d < kMinClipSeconds || d > kMaxClipSeconds) {
        log_warning("skipping " + path.string() + ": duration outside 1-10 s");
        continue;
      }
      clips.push_back({path.stem().string(), std::move(w)});
    } catch (const std::exception& e) {
      log_warning("skipping unreadable clip " + path.string() + ": " + e.what());
    }
  }
  if (clips.empty()) throw std::runtime_error("no usable clips in " + speech_dir.string());
  return clips;
}

std::vector<CorpusClip> synthetic_clips(std::size_t count, std::uint64_t seed,
                                        const SpeechSynthOptions& options) {
  std::vector<CorpusClip> clips;
  clips.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "clip_%03zu", i);
    clips.push_back({id, synthesize_speech(seed, i, options)});
  }
  return clips;
}

CorpusManifest load_manifest(const fs::path& root) {
  const fs::path path = root / "manifest.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("corpus manifest not found: " + path.string());
  try {
    return nlohmann::json::parse(in).get<CorpusManifest>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed manifest " + path.string() + ": " + e.what());
  }
}

ClipPair load_clip(const fs::path& root, const ManifestEntry& entry) {
  const fs::path dir = clip_dir(root, entry);
  ClipPair pair{dsp::read_wav(dir / "speech.wav"), dsp::read_wav(dir / "rf.wav")};
  if (pair.speech.sample_rate_hz != dsp::kSpeechRateHz || pair.rf.sample_rate_hz != dsp::kRadarRateHz)
    throw std::runtime_error("clip " + entry.id + " has unexpected sample rates");
  return pair;
}

}  // namespace r2s::radar
