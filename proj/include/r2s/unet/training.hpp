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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "r2s/dsp/mel.hpp"
#include "r2s/dsp/waveform.hpp"
#include "r2s/nn/params.hpp"
#include "r2s/radar/corpus.hpp"
#include "r2s/unet/radio_unet.hpp"

namespace r2s::unet {

/// Global log-Mel mean and standard deviation, one pair for RF inputs and
/// one for speech targets, measured on the training split.
struct NormStats {
  double rf_mean = 0.0;
  double rf_std = 1.0;
  double speech_mean = 0.0;
  double speech_std = 1.0;
};

void to_json(nlohmann::json& j, const NormStats& s);
void from_json(const nlohmann::json& j, NormStats& s);

/// (m - mean) / std; throws if m is already normalized or std <= 0.
dsp::MelSpectrogram normalize(const dsp::MelSpectrogram& m, double mean, double std);
/// m * std + mean; throws if m is not normalized.
dsp::MelSpectrogram denormalize(const dsp::MelSpectrogram& m, double mean, double std);

/// RF trace (any rate) -> cubic-spline resample to 8 kHz -> log-Mel.
dsp::MelSpectrogram rf_log_mel(const dsp::Waveform& rf);
dsp::MelSpectrogram speech_log_mel(const dsp::Waveform& speech);

/// Frame-aligned log-Mel pair; both matrices have the same frame count.
struct MelPair {
  std::string id;
  dsp::MelSpectrogram rf;
  dsp::MelSpectrogram speech;
};

MelPair make_mel_pair(const std::string& id, const radar::ClipPair& clip);

/// Every clip of one split, in manifest (sorted id) order.
std::vector<MelPair> load_mel_pairs(const std::filesystem::path& corpus_root,
                                    const radar::CorpusManifest& manifest, const std::string& split);

/// Throws std::invalid_argument on an empty set.
NormStats compute_norm_stats(std::span<const MelPair> pairs);

struct TrainConfig {
  std::size_t steps = 5000;
  double lr = 0.01;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 1000;  // 0 disables intermediate checkpoints
};

void to_json(nlohmann::json& j, const TrainConfig& c);
/// Missing keys keep their defaults; unknown keys throw std::invalid_argument.
void from_json(const nlohmann::json& j, TrainConfig& c);

struct TrainingState {
  RadioUNetConfig model;
  nn::ModelParams<float> params;
  std::size_t step = 0;  // completed steps
  double lr = 0.01;
  std::uint64_t seed = 0;
  NormStats norm;
};

TrainingState init_training_state(const RadioUNetConfig& model, const TrainConfig& train,
                                  const NormStats& norm);

/// Clip index and first frame of the crop used at `step`. A pure function of
/// (seed, step), so a resumed run sees the same crops.
struct Crop {
  std::size_t clip = 0;
  std::size_t offset = 0;
};
Crop sample_crop(std::uint64_t seed, std::size_t step, std::span<const MelPair> pairs,
                 std::size_t frames);

struct LossRecord {
  std::size_t step = 0;  // 1-based
  double l1_loss = 0.0;
  double wall_ms = 0.0;
};

/// Advances `state` until state.step == until: sample crop, forward, L1 on
/// normalized values, backward, SGD. Throws std::invalid_argument when the
/// set is empty or a clip is shorter than one crop.
void train_steps(TrainingState& state, std::span<const MelPair> pairs, std::size_t until,
                 const std::function<void(const LossRecord&, const TrainingState&)>& on_step = {});

/// Mean L1 over one fixed crop per pair (offset 0), without gradients.
double evaluate_l1(const TrainingState& state, std::span<const MelPair> pairs);

/// <dir>/model.ckpt plus the <dir>/state.json sidecar.
void save_state(const std::filesystem::path& dir, const TrainingState& state);
/// Throws std::runtime_error naming the missing or malformed file.
TrainingState load_state(const std::filesystem::path& dir);

/// Full training run over the train split of a corpus. Writes
/// <out>/loss.csv, <out>/checkpoints/step_NNNNNN/ every checkpoint_every
/// steps, and the final state in <out>. With `resume`, continues from the
/// state in <out> and appends to loss.csv.
std::vector<LossRecord> run_training(const std::filesystem::path& corpus_root,
                                     const std::filesystem::path& out_dir,
                                     const RadioUNetConfig& model, const TrainConfig& train,
                                     bool resume = false);

/// Window starts for a trace of `frames` frames: every `hop` frames, plus a
/// final window flush with the end when the hop grid leaves a remainder.
std::vector<std::size_t> window_starts(std::size_t frames, std::size_t window, std::size_t hop);

/// Joins per-window outputs (band-major, window frames each) into a
/// band-major matrix of `frames` frames. Overlapping frames are blended as
/// prev + a * (next - prev) with a rising linearly across the overlap, so
/// equal inputs come out unchanged.
std::vector<double> cross_fade(std::span<const std::vector<double>> windows,
                               std::span<const std::size_t> starts, std::size_t bands,
                               std::size_t window, std::size_t frames);

/// RF trace -> estimated speech log-Mel over the whole trace, in 80-frame
/// windows at 50% overlap. Throws std::invalid_argument when the trace is
/// shorter than one window.
dsp::MelSpectrogram infer(const dsp::Waveform& rf, const TrainingState& state);

}  // namespace r2s::unet
