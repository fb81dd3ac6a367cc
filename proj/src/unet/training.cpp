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

#include "r2s/unet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "r2s/dsp/stft.hpp"
#include "r2s/log.hpp"
#include "r2s/nn/ops.hpp"
#include "r2s/prng.hpp"

namespace r2s::unet {

namespace fs = std::filesystem;
using nn::Tensor;

namespace {

constexpr const char* kStateFormat = "r2s-train-state-1";
constexpr const char* kLossHeader = "step,l1_loss,wall_ms";

dsp::MelSpectrogram first_frames(const dsp::MelSpectrogram& m, std::size_t frames) {
  dsp::MelSpectrogram out = m;
  out.frames = frames;
  out.values.resize(m.bands * frames);
  for (std::size_t b = 0; b < m.bands; ++b)
    std::copy_n(m.values.begin() + b * m.frames, frames, out.values.begin() + b * frames);
  return out;
}

// [1, 1, bands, window] tensor from frames [offset, offset + window).
Tensor<float> crop_tensor(const dsp::MelSpectrogram& m, std::size_t offset, std::size_t window) {
  std::vector<float> data(m.bands * window);
  for (std::size_t b = 0; b < m.bands; ++b)
    for (std::size_t t = 0; t < window; ++t)
      data[b * window + t] = static_cast<float>(m.at(b, offset + t));
  return Tensor<float>::from({1, 1, m.bands, window}, std::move(data));
}

void check_pairs(const RadioUNetConfig& cfg, std::span<const MelPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("training set is empty");
  for (const auto& p : pairs) {
    if (!p.rf.normalized || !p.speech.normalized)
      throw std::invalid_argument("clip " + p.id + " is not normalized");
    if (p.rf.bands != cfg.input_bands || p.speech.bands != cfg.input_bands)
      throw std::invalid_argument("clip " + p.id + " has " + std::to_string(p.rf.bands) +
                                  " bands, model expects " + std::to_string(cfg.input_bands));
    if (p.rf.frames < cfg.input_frames || p.speech.frames != p.rf.frames)
      throw std::invalid_argument("clip " + p.id + " is shorter than one crop (" +
                                  std::to_string(p.rf.frames) + " < " +
                                  std::to_string(cfg.input_frames) + " frames)");
  }
}

std::string format_loss(const LossRecord& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu,%.9g,%.3f", r.step, r.l1_loss, r.wall_ms);
  return buf;
}

// Keeps the header and rows up to `last_step`; used when resuming.
void truncate_loss_log(const fs::path& path, std::size_t last_step) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot resume: missing loss log " + path.string());
  std::string line, kept;
  std::getline(in, line);
  kept = line + '\n';
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (std::stoull(line.substr(0, line.find(','))) > last_step) break;
    kept += line + '\n';
  }
  in.close();
  std::ofstream(path, std::ios::trunc) << kept;
}

}  // namespace

void to_json(nlohmann::json& j, const NormStats& s) {
  j = {{"rf_mean", s.rf_mean},
       {"rf_std", s.rf_std},
       {"speech_mean", s.speech_mean},
       {"speech_std", s.speech_std}};
}

void from_json(const nlohmann::json& j, NormStats& s) {
  j.at("rf_mean").get_to(s.rf_mean);
  j.at("rf_std").get_to(s.rf_std);
  j.at("speech_mean").get_to(s.speech_mean);
  j.at("speech_std").get_to(s.speech_std);
}

dsp::MelSpectrogram normalize(const dsp::MelSpectrogram& m, double mean, double std) {
  if (m.normalized) throw std::invalid_argument("normalize: input is already normalized");
  if (!(std > 0.0)) throw std::invalid_argument("normalize: std must be positive");
  dsp::MelSpectrogram out = m;
  for (double& v : out.values) v = (v - mean) / std;
  out.normalized = true;
  return out;
}

dsp::MelSpectrogram denormalize(const dsp::MelSpectrogram& m, double mean, double std) {
  if (!m.normalized) throw std::invalid_argument("denormalize: input is not normalized");
  dsp::MelSpectrogram out = m;
  for (double& v : out.values) v = v * std + mean;
  out.normalized = false;
  return out;
}

dsp::MelSpectrogram rf_log_mel(const dsp::Waveform& rf) {
  if (rf.sample_rate_hz == dsp::kSpeechRateHz) return dsp::log_mel(dsp::stft(rf));
  return dsp::log_mel(dsp::stft(dsp::resample_cubic_spline(rf, dsp::kSpeechRateHz)));
}

dsp::MelSpectrogram speech_log_mel(const dsp::Waveform& speech) {
  if (speech.sample_rate_hz != dsp::kSpeechRateHz)
    throw std::invalid_argument("speech must be sampled at 8 kHz");
  return dsp::log_mel(dsp::stft(speech));
}

MelPair make_mel_pair(const std::string& id, const radar::ClipPair& clip) {
  const dsp::MelSpectrogram rf = rf_log_mel(clip.rf);
  const dsp::MelSpectrogram speech = speech_log_mel(clip.speech);
  const std::size_t frames = std::min(rf.frames, speech.frames);
  return {id, first_frames(rf, frames), first_frames(speech, frames)};
}

std::vector<MelPair> load_mel_pairs(const fs::path& corpus_root, const radar::CorpusManifest& manifest,
                                    const std::string& split) {
  std::vector<MelPair> pairs;
  for (const auto* entry : manifest.entries(split))
    pairs.push_back(make_mel_pair(entry->id, radar::load_clip(corpus_root, *entry)));
  return pairs;
}

NormStats compute_norm_stats(std::span<const MelPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("normalization stats need at least one clip");
  auto stats = [&](auto member) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& p : pairs)
      for (double v : (p.*member).values) {
        sum += v;
        sq += v * v;
        ++n;
      }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(sq / static_cast<double>(n) - mean * mean, 0.0);
    if (!(var > 0.0)) throw std::invalid_argument("log-Mel values are constant; cannot normalize");
    return std::pair{mean, std::sqrt(var)};
  };
  const auto [rf_mean, rf_std] = stats(&MelPair::rf);
  const auto [sp_mean, sp_std] = stats(&MelPair::speech);
  return {rf_mean, rf_std, sp_mean, sp_std};
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"steps", c.steps}, {"lr", c.lr}, {"seed", c.seed}, {"checkpoint_every", c.checkpoint_every}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  for (const auto& [key, value] : j.items())
    if (key != "steps" && key != "lr" && key != "seed" && key != "checkpoint_every")
      throw std::invalid_argument("unknown training key: " + key);
  if (j.contains("steps")) j.at("steps").get_to(c.steps);
  if (j.contains("lr")) j.at("lr").get_to(c.lr);
  if (j.contains("seed")) j.at("seed").get_to(c.seed);
  if (j.contains("checkpoint_every")) j.at("checkpoint_every").get_to(c.checkpoint_every);
}

TrainingState init_training_state(const RadioUNetConfig& model, const TrainConfig& train,
                                  const NormStats& norm) {
  if (!std::isfinite(train.lr) || train.lr < 0.0)
    throw std::invalid_argument("learning rate must be finite and non-negative");
  return {model, init_params<float>(model, train.seed), 0, train.lr, train.seed, norm};
}

Crop sample_crop(std::uint64_t seed, std::size_t step, std::span<const MelPair> pairs,
                 std::size_t frames) {
  CounterRng rng(seed, stream_id("train-crop") + step);
  Crop crop;
  crop.clip = static_cast<std::size_t>(rng.index(pairs.size()));
  const std::size_t available = pairs[crop.clip].rf.frames;
  if (available < frames) throw std::invalid_argument("clip " + pairs[crop.clip].id + " is shorter than one crop");
  crop.offset = static_cast<std::size_t>(rng.index(available - frames + 1));
  return crop;
}

void train_steps(TrainingState& state, std::span<const MelPair> pairs, std::size_t until,
                 const std::function<void(const LossRecord&, const TrainingState&)>& on_step) {
  check_pairs(state.model, pairs);
  const std::size_t window = state.model.input_frames;
  while (state.step < until) {
    const auto t0 = std::chrono::steady_clock::now();
    const Crop crop = sample_crop(state.seed, state.step, pairs, window);
    const MelPair& pair = pairs[crop.clip];
    const Tensor<float> input = crop_tensor(pair.rf, crop.offset, window);
    const Tensor<float> target = crop_tensor(pair.speech, crop.offset, window);
    const Tensor<float> loss = nn::l1_loss(forward(state.model, state.params, input), target);
    loss.backward();
    nn::sgd_step(state.params, state.lr);
    ++state.step;
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (on_step) on_step({state.step, static_cast<double>(loss.item()), ms}, state);
  }
}

double evaluate_l1(const TrainingState& state, std::span<const MelPair> pairs) {
  check_pairs(state.model, pairs);
  nn::NoGradGuard guard;
  double total = 0.0;
  for (const auto& p : pairs) {
    const std::size_t window = state.model.input_frames;
    const Tensor<float> out = forward(state.model, state.params, crop_tensor(p.rf, 0, window));
    total += nn::l1_loss(out, crop_tensor(p.speech, 0, window)).item();
  }
  return total / static_cast<double>(pairs.size());
}

void save_state(const fs::path& dir, const TrainingState& state) {
  fs::create_directories(dir);
  nn::save_checkpoint(dir / "model.ckpt", state.params);
  nlohmann::json j = {{"format", kStateFormat},
                      {"step", state.step},
                      {"lr", state.lr},
                      {"seed", state.seed},
                      {"norm", state.norm},
                      {"model", state.model}};
  std::ofstream out(dir / "state.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / "state.json").string());
  out << j.dump(2) << '\n';
}

TrainingState load_state(const fs::path& dir) {
  const fs::path json_path = dir / "state.json";
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("missing training state: " + json_path.string());
  TrainingState state;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.value("format", "") != kStateFormat)
      throw std::runtime_error("unsupported state format in " + json_path.string());
    j.at("step").get_to(state.step);
    j.at("lr").get_to(state.lr);
    j.at("seed").get_to(state.seed);
    j.at("norm").get_to(state.norm);
    j.at("model").get_to(state.model);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed " + json_path.string() + ": " + e.what());
  }
  state.params = init_params<float>(state.model, state.seed);
  nn::load_checkpoint(dir / "model.ckpt", state.params);
  return state;
}

std::vector<LossRecord> run_training(const fs::path& corpus_root, const fs::path& out_dir,
                                     const RadioUNetConfig& model, const TrainConfig& train,
                                     bool resume) {
  const radar::CorpusManifest manifest = radar::load_manifest(corpus_root);
  std::vector<MelPair> pairs = load_mel_pairs(corpus_root, manifest, "train");
  if (pairs.empty()) throw std::invalid_argument("corpus has no training clips: " + corpus_root.string());

  fs::create_directories(out_dir);
  const fs::path log_path = out_dir / "loss.csv";
  TrainingState state;
  if (resume) {
    state = load_state(out_dir);
    truncate_loss_log(log_path, state.step);
  } else {
    state = init_training_state(model, train, compute_norm_stats(pairs));
    std::ofstream(log_path, std::ios::trunc) << kLossHeader << '\n';
  }
  for (auto& p : pairs) {
    p.rf = normalize(p.rf, state.norm.rf_mean, state.norm.rf_std);
    p.speech = normalize(p.speech, state.norm.speech_mean, state.norm.speech_std);
  }

  std::ofstream log(log_path, std::ios::app);
  if (!log) throw std::runtime_error("cannot write " + log_path.string());
  std::vector<LossRecord> records;
  train_steps(state, pairs, train.steps, [&](const LossRecord& r, const TrainingState& s) {
    records.push_back(r);
    log << format_loss(r) << '\n';
    if (train.checkpoint_every && s.step % train.checkpoint_every == 0 && s.step < train.steps) {
      log.flush();
      char name[32];
      std::snprintf(name, sizeof name, "step_%06zu", s.step);
      save_state(out_dir / "checkpoints" / name, s);
      save_state(out_dir, s);
      log_info("step " + std::to_string(s.step) + " l1 " + std::to_string(r.l1_loss));
    }
  });
  log.flush();
  save_state(out_dir, state);
  return records;
}

std::vector<std::size_t> window_starts(std::size_t frames, std::size_t window, std::size_t hop) {
  if (window == 0 || hop == 0 || hop > window) throw std::invalid_argument("window_starts: need 0 < hop <= window");
  if (frames < window)
    throw std::invalid_argument("trace shorter than one window (" + std::to_string(frames) + " < " +
                                std::to_string(window) + " frames)");
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window <= frames; s += hop) starts.push_back(s);
  if (starts.back() + window < frames) starts.push_back(frames - window);
  return starts;
}

std::vector<double> cross_fade(std::span<const std::vector<double>> windows,
                               std::span<const std::size_t> starts, std::size_t bands,
                               std::size_t window, std::size_t frames) {
  if (windows.size() != starts.size()) throw std::invalid_argument("cross_fade: window/start count mismatch");
  std::vector<double> out(bands * frames, 0.0);
  std::size_t covered = 0;  // frames [0, covered) already written
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const std::size_t s = starts[i];
    if (windows[i].size() != bands * window || s + window > frames || s > covered)
      throw std::invalid_argument("cross_fade: windows must tile the output without gaps");
    const std::size_t overlap = covered - s;
    for (std::size_t b = 0; b < bands; ++b)
      for (std::size_t t = 0; t < window; ++t) {
        const double next = windows[i][b * window + t];
        double& dst = out[b * frames + s + t];
        if (t < overlap) {
          const double a = static_cast<double>(t + 1) / static_cast<double>(overlap + 1);
          dst = dst + a * (next - dst);
        } else {
          dst = next;
        }
      }
    covered = std::max(covered, s + window);
  }
  if (covered != frames) throw std::invalid_argument("cross_fade: windows do not reach the end");
  return out;
}

dsp::MelSpectrogram infer(const dsp::Waveform& rf, const TrainingState& state) {
  const RadioUNetConfig& cfg = state.model;
  const dsp::MelSpectrogram m = normalize(rf_log_mel(rf), state.norm.rf_mean, state.norm.rf_std);
  if (m.bands != cfg.input_bands) throw std::invalid_argument("model band count does not match log-Mel");
  const std::size_t window = cfg.input_frames;
  const auto starts = window_starts(m.frames, window, window / 2);

  std::vector<std::vector<double>> outputs;
  {
    nn::NoGradGuard guard;
    for (std::size_t s : starts) {
      const Tensor<float> y = forward(cfg, state.params, crop_tensor(m, s, window));
      outputs.emplace_back(y.data().begin(), y.data().end());
    }
  }
  dsp::MelSpectrogram est = m;
  est.values = cross_fade(outputs, starts, m.bands, window, m.frames);
  est = denormalize(est, state.norm.speech_mean, state.norm.speech_std);
  for (double& v : est.values) v = std::max(v, dsp::kLogFloor);
  return est;
}

}  // namespace r2s::unet
