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
#include <string_view>
#include <vector>

#include <json.hpp>

#include "r2s/dsp/mel.hpp"
#include "r2s/dsp/waveform.hpp"
#include "r2s/unet/training.hpp"

namespace r2s::metrics {

/// Waveform synthesis paths compared by evaluate().
enum class Variant {
  kGriffinLim,         // estimated Mel -> magnitude -> Griffin-Lim
  kIstftRfPhase,       // estimated Mel -> magnitude, phase of the upsampled RF STFT
  kCopyInputBaseline,  // the upsampled RF trace itself
};

inline constexpr Variant kAllVariants[] = {Variant::kGriffinLim, Variant::kIstftRfPhase,
                                           Variant::kCopyInputBaseline};

std::string_view variant_name(Variant v);
/// Inverse of variant_name(); throws std::invalid_argument listing the
/// accepted names.
Variant parse_variant(std::string_view name);

/// RF trace upsampled to 8 kHz with the same resampler the model input uses.
dsp::Waveform upsample_rf(const dsp::Waveform& rf);

/// 8 kHz waveform for one variant. `estimate` is the model's speech log-Mel
/// for `rf` (ignored by the baseline).
dsp::Waveform synthesize(Variant v, const dsp::MelSpectrogram& estimate, const dsp::Waveform& rf);

struct ClipScore {
  std::string id;
  double lsd = 0.0;
  double stoi = 0.0;
};

struct VariantReport {
  Variant variant = Variant::kGriffinLim;
  std::vector<ClipScore> clips;  // sorted by id
  double lsd_mean = 0.0;
  double lsd_std = 0.0;  // population standard deviation
  double stoi_mean = 0.0;
  double stoi_std = 0.0;
};

struct EvalReport {
  std::vector<VariantReport> variants;  // in request order

  const VariantReport& at(Variant v) const;
};

/// Recomputes the aggregates of `report` from its clips (sorted by id first).
void summarize(VariantReport& report);

/// Scores every test-split clip of the corpus under each variant. Clips are
/// spread over `threads` workers; the report does not depend on it. Throws
/// std::invalid_argument on an empty test split or variant list.
EvalReport evaluate(const std::filesystem::path& corpus_root, const unet::TrainingState& state,
                    std::span<const Variant> variants, std::size_t threads = 1);

void to_json(nlohmann::json& j, const EvalReport& r);

/// Table with one row per aggregate (lsd_mean, lsd_std, stoi_mean, stoi_std)
/// and one column per variant.
std::string report_csv(const EvalReport& r);

}  // namespace r2s::metrics
