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

#include "r2s/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "r2s/cli/plot.hpp"
#include "r2s/dsp/audio_io.hpp"
#include "r2s/metrics/evaluate.hpp"
#include "r2s/radar/corpus.hpp"
#include "r2s/unet/training.hpp"

namespace r2s::cli {
namespace fs = std::filesystem;
namespace {

constexpr char kMelMagic[] = "R2SMEL1";

bool non_empty_dir(const fs::path& dir) { return fs::is_directory(dir) && !fs::is_empty(dir); }

void prepare_output_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir))
    throw CommandError("output path " + dir.string() + " exists and is not a directory");
  if (non_empty_dir(dir)) {
    if (!force) throw CommandError("output directory " + dir.string() + " is not empty; pass --force to overwrite");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
}

void prepare_output_file(const fs::path& file, bool force) {
  if (fs::exists(file) && !force)
    throw CommandError("output file " + file.string() + " exists; pass --force to overwrite");
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw CommandError("cannot write " + path.string());
}

void write_snapshot(const fs::path& dir, const RunConfig& cfg) {
  write_text(dir / kConfigSnapshot, to_json(cfg).dump(2) + "\n");
}

void require_corpus(const fs::path& root) {
  if (!fs::exists(root / "manifest.json"))
    throw CommandError("missing corpus manifest " + (root / "manifest.json").string() + "; run 'r2s simulate' first");
}

unet::TrainingState require_state(const fs::path& run) {
  for (const char* name : {"model.ckpt", "state.json"})
    if (!fs::exists(run / name))
      throw CommandError("missing checkpoint " + (run / name).string() + "; run 'r2s train' first");
  return unet::load_state(run);
}

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

}  // namespace

void cmd_simulate(const RunConfig& cfg, bool force, std::ostream& out) {
  const fs::path root = cfg.corpus_dir;
  std::vector<radar::CorpusClip> clips;
  if (cfg.corpus.speech_dir.empty()) {
    radar::SpeechSynthOptions opts;
    opts.min_duration_s = cfg.corpus.min_duration_s;
    opts.max_duration_s = cfg.corpus.max_duration_s;
    clips = radar::synthetic_clips(cfg.corpus.clips, cfg.seed, opts);
  } else {
    clips = radar::load_speech_dir(cfg.corpus.speech_dir);
  }
  prepare_output_dir(root, force);
  const auto manifest = radar::build_corpus(clips, root, cfg.radar, cfg.corpus.split, cfg.threads);
  write_snapshot(root, cfg);

  double total = 0.0, shortest = 1e300, longest = 0.0;
  for (const auto& e : manifest.clips) {
    total += e.duration_s;
    shortest = std::min(shortest, e.duration_s);
    longest = std::max(longest, e.duration_s);
  }
  out << "corpus " << root.string() << ": " << manifest.clips.size() << " clips (train "
      << manifest.entries("train").size() << ", test " << manifest.entries("test").size() << "), "
      << format("%.2f-%.2f s each, %.1f s total", shortest, longest, total) << '\n';
}

void cmd_train(const RunConfig& cfg, bool force, bool resume, std::ostream& out) {
  const fs::path corpus = cfg.corpus_dir, run = cfg.run_dir;
  require_corpus(corpus);
  if (resume) {
    require_state(run);
  } else {
    prepare_output_dir(run, force);
  }
  write_snapshot(run, cfg);
  const auto records = unet::run_training(corpus, run, cfg.model, cfg.train_config(), resume);
  if (records.empty()) {
    out << "run " << run.string() << ": already at step " << cfg.train_steps << '\n';
    return;
  }
  out << "run " << run.string() << ": steps " << records.front().step << "-" << records.back().step << ", "
      << format("l1 %.4f -> %.4f", records.front().l1_loss, records.back().l1_loss) << '\n';
}

void cmd_infer(const RunConfig& cfg, const fs::path& input, const fs::path& out_dir, bool force,
               std::ostream& out) {
  const unet::TrainingState state = require_state(cfg.run_dir);
  if (!fs::exists(input)) throw CommandError("missing input trace " + input.string());
  const dsp::Waveform rf = dsp::read_wav(input);
  prepare_output_dir(out_dir, force);

  const dsp::MelSpectrogram estimate = unet::infer(rf, state);
  dsp::MatrixDump dump;
  dump.rows = static_cast<std::uint32_t>(estimate.bands);
  dump.cols = static_cast<std::uint32_t>(estimate.frames);
  dump.values.assign(estimate.values.begin(), estimate.values.end());
  dsp::write_matrix_dump(out_dir / "mel.r2smel", dump);
  dsp::write_wav(out_dir / "speech.wav", metrics::synthesize(cfg.infer_variant, estimate, rf));
  write_snapshot(out_dir, cfg);
  out << "infer " << input.string() << ": " << estimate.bands << "x" << estimate.frames << " Mel, "
      << metrics::variant_name(cfg.infer_variant) << " waveform in " << out_dir.string() << '\n';
}

void cmd_eval(const RunConfig& cfg, const fs::path& out_dir, bool force, std::ostream& out) {
  require_corpus(cfg.corpus_dir);
  const unet::TrainingState state = require_state(cfg.run_dir);
  prepare_output_dir(out_dir, force);
  const auto report = metrics::evaluate(cfg.corpus_dir, state, cfg.eval_variants, cfg.threads);
  write_text(out_dir / "report.json", nlohmann::json(report).dump(2) + "\n");
  const std::string csv = metrics::report_csv(report);
  write_text(out_dir / "report.csv", csv);
  write_snapshot(out_dir, cfg);
  out << csv;
}

void cmd_plot(const fs::path& input, const fs::path& output, bool force, std::ostream& out) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw CommandError("missing plot input " + input.string());
  char magic[sizeof kMelMagic - 1] = {};
  in.read(magic, sizeof magic);
  const bool is_mel = in.gcount() == sizeof magic && std::equal(magic, magic + sizeof magic, kMelMagic);
  in.close();

  const Image image = is_mel ? render_mel(dsp::read_matrix_dump(input)) : render_loss(read_loss_csv(input));
  prepare_output_file(output, force);
  write_ppm(output, image);
  out << "plot " << output.string() << ": " << image.width << "x" << image.height << (is_mel ? " Mel heatmap" : " loss curve")
      << '\n';
}

}  // namespace r2s::cli
