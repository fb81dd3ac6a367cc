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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "r2s/dsp/waveform.hpp"
#include "r2s/radar/simulate.hpp"
#include "r2s/radar/speech_synth.hpp"

namespace r2s::radar {

struct CorpusClip {
  std::string id;
  dsp::Waveform speech;
};

struct SplitFractions {
  double train = 0.8;
  double test = 0.2;
};

struct ManifestEntry {
  std::string id;
  double duration_s = 0.0;     // speech
  double rf_duration_s = 0.0;  // radar trace
  std::string split;           // "train" | "test"
};

/// Corpus description written to <root>/manifest.json. Clips live under
/// <root>/<split>/<id>/{speech.wav, rf.wav}.
struct CorpusManifest {
  RadarConfig radar;
  SplitFractions split;
  double trace_scale = 1.0;  // common factor mapping corpus phase to unit peak
  std::vector<ManifestEntry> clips;

  std::vector<const ManifestEntry*> entries(const std::string& split_name) const;
};

void to_json(nlohmann::json& j, const CorpusManifest& m);
void from_json(const nlohmann::json& j, CorpusManifest& m);

std::filesystem::path clip_dir(const std::filesystem::path& root, const ManifestEntry& entry);

/// Deterministic split: ids sorted ascending, the last round(n * test) go to
/// the test split.
std::vector<std::string> assign_splits(std::span<const std::string> sorted_ids,
                                       const SplitFractions& split);

/// Simulates radar traces for every clip (speech resampled to 8 kHz when
/// needed), normalizes all traces by the corpus-wide phase peak and writes
/// the layout plus manifest.json. `threads` caps simulation workers; output
/// does not depend on it.
CorpusManifest build_corpus(std::span<const CorpusClip> clips, const std::filesystem::path& root,
                            const RadarConfig& cfg, const SplitFractions& split,
                            std::size_t threads = 1);

/// Reads every *.wav under `speech_dir` (ids are file stems). Unreadable
/// clips and clips outside 1-10 s are skipped with a warning; an empty result
/// is an error.
std::vector<CorpusClip> load_speech_dir(const std::filesystem::path& speech_dir);

std::vector<CorpusClip> synthetic_clips(std::size_t count, std::uint64_t seed,
                                        const SpeechSynthOptions& options = {});

CorpusManifest load_manifest(const std::filesystem::path& root);

struct ClipPair {
  dsp::Waveform speech;  // 8000 Hz
  dsp::Waveform rf;      // 5100 Hz
};

ClipPair load_clip(const std::filesystem::path& root, const ManifestEntry& entry);

}  // namespace r2s::radar
