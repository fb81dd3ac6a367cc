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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "r2s/metrics/evaluate.hpp"
#include "r2s/radar/corpus.hpp"
#include "r2s/radar/simulate.hpp"
#include "r2s/unet/radio_unet.hpp"
#include "r2s/unet/training.hpp"

namespace r2s::cli {

/// Invalid configuration document or override; the message names the key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CorpusOptions {
  std::size_t clips = 50;  // synthetic clips when speech_dir is empty
  double min_duration_s = 2.0;
  double max_duration_s = 4.0;
  radar::SplitFractions split;
  std::string speech_dir;  // directory of 8 kHz+ WAV files to use instead
};

/// Everything a run needs. The defaults reproduce the reference run: 50
/// synthetic clips, 40/10 split, the default model and 5000 SGD steps.
struct RunConfig {
  std::uint64_t seed = 0;  // corpus synthesis and training crops
  std::size_t threads = 1;
  std::string corpus_dir = "corpus";
  std::string run_dir = "run";
  CorpusOptions corpus;
  radar::RadarConfig radar;
  unet::RadioUNetConfig model;
  std::size_t train_steps = 5000;
  double train_lr = 0.01;
  std::size_t checkpoint_every = 1000;
  std::vector<metrics::Variant> eval_variants{std::begin(metrics::kAllVariants),
                                              std::end(metrics::kAllVariants)};
  metrics::Variant infer_variant = metrics::Variant::kGriffinLim;

  unet::TrainConfig train_config() const;
  /// Throws ConfigError naming the first offending key.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);

/// Builds a config from a document over the defaults. Keys absent from the
/// default document, and values of the wrong type, throw ConfigError with
/// the dotted key path.
RunConfig config_from_json(const nlohmann::json& doc);

/// Layers a run configuration: defaults, then the optional config file, then
/// the R2S_SEED value, then `key=value` overrides in order. Values parse as
/// JSON when possible and as plain strings otherwise.
RunConfig resolve_config(const std::optional<std::string>& config_path,
                         const std::optional<std::string>& env_seed,
                         const std::vector<std::string>& overrides);

/// Every leaf key of the default document with its default value, one
/// "key = value" per line.
std::string config_reference();

}  // namespace r2s::cli
