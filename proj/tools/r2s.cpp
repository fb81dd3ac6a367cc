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

// r2s: simulate a radar speech corpus, train the reconstruction network,
// run inference, score the test split and plot artifacts.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "r2s/cli/commands.hpp"
#include "r2s/cli/config.hpp"

namespace {

using r2s::cli::RunConfig;

// Options shared by every command that reads the run configuration.
struct ConfigFlags {
  std::optional<std::string> config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> corpus;
  std::optional<std::string> run;
  bool force = false;
  // Flag-derived key=value pairs, applied after --set.
  std::vector<std::string> flag_overrides;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config, "JSON config file layered over the defaults")->check(CLI::ExistingFile);
    cmd.add_option("--set", sets, "Override one config key, e.g. --set train.lr=0.02 (repeatable)");
    cmd.add_option("--seed", seed, "Overrides the 'seed' key and R2S_SEED");
    cmd.add_option("--threads", threads, "Worker cap (the 'threads' key)");
    cmd.add_option("--corpus", corpus, "Corpus directory (the 'paths.corpus' key)");
    cmd.add_option("--run", run, "Run directory (the 'paths.run' key)");
    cmd.add_flag("--force", force, "Replace existing outputs");
  }

  template <typename T>
  void set_if(const char* key, const std::optional<T>& value) {
    if (value) flag_overrides.push_back(std::string(key) + "=" + nlohmann::json(*value).dump());
  }

  RunConfig resolve() {
    set_if("seed", seed);
    set_if("threads", threads);
    set_if("paths.corpus", corpus);
    set_if("paths.run", run);
    std::vector<std::string> all = sets;
    all.insert(all.end(), flag_overrides.begin(), flag_overrides.end());
    const char* env = std::getenv("R2S_SEED");
    return r2s::cli::resolve_config(config, env ? std::optional<std::string>(env) : std::nullopt, all);
  }
};

void print_error(const std::string& command, const std::string& message) {
  std::cerr << nlohmann::json{{"command", command}, {"error", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radar-to-speech pipeline: simulate, train, infer, eval, plot"};
  app.require_subcommand(1);
  const std::string keys = "Config keys and defaults (precedence: defaults < --config < R2S_SEED < --set < flags):\n" +
                           r2s::cli::config_reference();
  app.footer(keys);

  ConfigFlags sim_flags, train_flags, infer_flags, eval_flags;

  auto* simulate = app.add_subcommand("simulate", "Synthesize speech and simulate the radar corpus");
  sim_flags.attach(*simulate);
  std::optional<std::size_t> clips;
  std::optional<std::string> speech_dir;
  simulate->add_option("--clips", clips, "Synthetic clip count (the 'corpus.clips' key)");
  simulate->add_option("--speech-dir", speech_dir, "Use WAV files from this directory instead of synthetic speech");

  auto* train = app.add_subcommand("train", "Train the network on the corpus train split");
  train_flags.attach(*train);
  std::optional<std::size_t> steps, checkpoint_every;
  std::optional<double> lr;
  bool resume = false;
  train->add_option("--steps", steps, "SGD steps (the 'train.steps' key)");
  train->add_option("--lr", lr, "Learning rate (the 'train.lr' key)");
  train->add_option("--checkpoint-every", checkpoint_every, "Checkpoint interval (the 'train.checkpoint_every' key)");
  train->add_flag("--resume", resume, "Continue the state stored in the run directory");

  auto* infer = app.add_subcommand("infer", "Estimate speech from one RF trace");
  infer_flags.attach(*infer);
  std::string infer_input, infer_out;
  std::optional<std::string> variant;
  infer->add_option("--input", infer_input, "RF trace WAV (5100 Hz)")->required();
  infer->add_option("--out", infer_out, "Output directory")->required();
  infer->add_option("--variant", variant, "Waveform synthesis (the 'infer.variant' key)");

  auto* eval = app.add_subcommand("eval", "Score the test split with LSD and STOI");
  eval_flags.attach(*eval);
  std::optional<std::string> eval_out;
  std::optional<std::vector<std::string>> variants;
  eval->add_option("--out", eval_out, "Report directory (default <run>/eval)");
  eval->add_option("--variants", variants, "Variants to score (the 'eval.variants' key)");

  auto* plot = app.add_subcommand("plot", "Render a Mel dump or a loss log to a PPM image");
  std::string plot_input, plot_out;
  bool plot_force = false;
  plot->add_option("--input", plot_input, "mel.r2smel dump or loss.csv")->required();
  plot->add_option("--out", plot_out, "Output .ppm path")->required();
  plot->add_flag("--force", plot_force, "Replace an existing image");

  for (auto* cmd : {simulate, train, infer, eval}) cmd->footer(keys);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    const auto subs = app.get_subcommands();
    print_error(subs.empty() ? "r2s" : subs.front()->get_name(), e.what());
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (simulate->parsed()) {
      sim_flags.set_if("corpus.clips", clips);
      sim_flags.set_if("corpus.speech_dir", speech_dir);
      r2s::cli::cmd_simulate(sim_flags.resolve(), sim_flags.force, std::cout);
    } else if (train->parsed()) {
      train_flags.set_if("train.steps", steps);
      train_flags.set_if("train.lr", lr);
      train_flags.set_if("train.checkpoint_every", checkpoint_every);
      r2s::cli::cmd_train(train_flags.resolve(), train_flags.force, resume, std::cout);
    } else if (infer->parsed()) {
      infer_flags.set_if("infer.variant", variant);
      r2s::cli::cmd_infer(infer_flags.resolve(), infer_input, infer_out, infer_flags.force, std::cout);
    } else if (eval->parsed()) {
      eval_flags.set_if("eval.variants", variants);
      const RunConfig cfg = eval_flags.resolve();
      r2s::cli::cmd_eval(cfg, eval_out ? std::filesystem::path(*eval_out) : std::filesystem::path(cfg.run_dir) / "eval",
                         eval_flags.force, std::cout);
    } else if (plot->parsed()) {
      r2s::cli::cmd_plot(plot_input, plot_out, plot_force, std::cout);
    }
  } catch (const r2s::cli::ConfigError& e) {
    print_error(command, e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error(command, e.what());
    return 1;
  }
  return 0;
}
