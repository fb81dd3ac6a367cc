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

#include <filesystem>
#include <ostream>
#include <stdexcept>

#include "r2s/cli/config.hpp"

namespace r2s::cli {

/// A command precondition failed (missing artifact, occupied output).
class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every command that writes a directory stores the resolved config there
/// under this name.
inline constexpr const char* kConfigSnapshot = "config.json";

/// Synthesizes (or loads) speech, simulates radar traces and writes the
/// corpus to cfg.corpus_dir. Refuses a non-empty directory unless `force`,
/// which clears it first.
void cmd_simulate(const RunConfig& cfg, bool force, std::ostream& out);

/// Trains on the corpus train split into cfg.run_dir. `resume` continues
/// the state already there; otherwise a non-empty run directory needs
/// `force`.
void cmd_train(const RunConfig& cfg, bool force, bool resume, std::ostream& out);

/// RF WAV -> <out_dir>/mel.r2smel (80 x frames estimate) and
/// <out_dir>/speech.wav synthesized with cfg.infer_variant.
void cmd_infer(const RunConfig& cfg, const std::filesystem::path& input, const std::filesystem::path& out_dir,
               bool force, std::ostream& out);

/// Scores the test split into <out_dir>/report.json and report.csv.
void cmd_eval(const RunConfig& cfg, const std::filesystem::path& out_dir, bool force, std::ostream& out);

/// Renders a Mel dump (heatmap) or a loss log (curve) to a PPM image.
void cmd_plot(const std::filesystem::path& input, const std::filesystem::path& output, bool force,
              std::ostream& out);

}  // namespace r2s::cli
