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

#include "r2s/metrics/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "r2s/dsp/griffin_lim.hpp"
#include "r2s/dsp/stft.hpp"
#include "r2s/log.hpp"
#include "r2s/metrics/metrics.hpp"
#include "r2s/parallel.hpp"
#include "r2s/radar/corpus.hpp"

namespace r2s::metrics {
namespace {

struct Stats {
  double mean = 0.0;
  double std = 0.0;
};

Stats stats_of(const std::vector<ClipScore>& clips, double ClipScore::*field) {
  Stats s;
  if (clips.empty()) return s;
  const auto n = static_cast<double>(clips.size());
  for (const auto& c : clips) s.mean += c.*field;
  s.mean /= n;
  double var = 0.0;
  for (const auto& c : clips) var += (c.*field - s.mean) * (c.*field - s.mean);
  s.std = std::sqrt(var / n);
  return s;
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kGriffinLim:
      return "griffinlim";
    case Variant::kIstftRfPhase:
      return "istft-rf-phase";
    case Variant::kCopyInputBaseline:
      return "copy-input-baseline";
  }
  throw std::invalid_argument("unknown variant");
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants)
    if (variant_name(v) == name) return v;
  throw std::invalid_argument("unknown variant '" + std::string(name) +
                              "' (expected griffinlim, istft-rf-phase or copy-input-baseline)");
}

dsp::Waveform upsample_rf(const dsp::Waveform& rf) {
  if (rf.sample_rate_hz == dsp::kSpeechRateHz) return rf;
  return dsp::resample_cubic_spline(rf, dsp::kSpeechRateHz);
}

dsp::Waveform synthesize(Variant v, const dsp::MelSpectrogram& estimate, const dsp::Waveform& rf) {
  switch (v) {
    case Variant::kGriffinLim:
      return dsp::griffin_lim(dsp::invert_mel(estimate));
    case Variant::kIstftRfPhase: {
      const dsp::Spectrogram phase = dsp::stft(upsample_rf(rf));
      return dsp::istft(dsp::with_phase(dsp::invert_mel(estimate), phase));
    }
    case Variant::kCopyInputBaseline:
      return upsample_rf(rf);
  }
  throw std::invalid_argument("unknown variant");
}

const VariantReport& EvalReport::at(Variant v) const {
  for (const auto& r : variants)
    if (r.variant == v) return r;
  throw std::out_of_range("report has no variant " + std::string(variant_name(v)));
}

void summarize(VariantReport& report) {
  std::sort(report.clips.begin(), report.clips.end(),
            [](const ClipScore& a, const ClipScore& b) { return a.id < b.id; });
  const Stats l = stats_of(report.clips, &ClipScore::lsd);
  const Stats s = stats_of(report.clips, &ClipScore::stoi);
  report.lsd_mean = l.mean;
  report.lsd_std = l.std;
  report.stoi_mean = s.mean;
  report.stoi_std = s.std;
}

EvalReport evaluate(const std::filesystem::path& corpus_root, const unet::TrainingState& state,
                    std::span<const Variant> variants, std::size_t threads) {
  if (variants.empty()) throw std::invalid_argument("evaluate: no variants requested");
  const radar::CorpusManifest manifest = radar::load_manifest(corpus_root);
  const auto entries = manifest.entries("test");
  if (entries.empty()) throw std::invalid_argument("evaluate: the test split is empty");

  // scores[clip][variant]
  std::vector<std::vector<ClipScore>> scores(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    const radar::ClipPair clip = radar::load_clip(corpus_root, *entries[i]);
    const dsp::MelSpectrogram estimate = unet::infer(clip.rf, state);
    for (Variant v : variants) {
      const dsp::Waveform est = synthesize(v, estimate, clip.rf);
      ClipScore s{entries[i]->id, lsd(clip.speech, est), stoi(clip.speech, est)};
      if (s.stoi < 0.0 || s.stoi > 1.0)
        log_warning("stoi " + std::to_string(s.stoi) + " outside [0, 1] for " + s.id + " (" +
                    std::string(variant_name(v)) + ")");
      scores[i].push_back(std::move(s));
    }
  });

  EvalReport report;
  for (std::size_t k = 0; k < variants.size(); ++k) {
    VariantReport r;
    r.variant = variants[k];
    for (const auto& per_clip : scores) r.clips.push_back(per_clip[k]);
    summarize(r);
    report.variants.push_back(std::move(r));
  }
  return report;
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json::object();
  j["format"] = "r2s-eval-report-1";
  nlohmann::json variants = nlohmann::json::array();
  for (const auto& v : r.variants) {
    nlohmann::json clips = nlohmann::json::array();
    for (const auto& c : v.clips) clips.push_back({{"id", c.id}, {"lsd", c.lsd}, {"stoi", c.stoi}});
    variants.push_back({{"variant", variant_name(v.variant)},
                        {"lsd_mean", v.lsd_mean},
                        {"lsd_std", v.lsd_std},
                        {"stoi_mean", v.stoi_mean},
                        {"stoi_std", v.stoi_std},
                        {"clips", clips}});
  }
  j["variants"] = variants;
}

std::string report_csv(const EvalReport& r) {
  std::string out = "metric";
  for (const auto& v : r.variants) out += "," + std::string(variant_name(v.variant));
  out += '\n';
  const std::pair<const char*, double VariantReport::*> rows[] = {{"lsd_mean", &VariantReport::lsd_mean},
                                                                  {"lsd_std", &VariantReport::lsd_std},
                                                                  {"stoi_mean", &VariantReport::stoi_mean},
                                                                  {"stoi_std", &VariantReport::stoi_std}};
  char buf[32];
  for (const auto& [name, field] : rows) {
    out += name;
    for (const auto& v : r.variants) {
      std::snprintf(buf, sizeof buf, ",%.6f", v.*field);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace r2s::metrics
