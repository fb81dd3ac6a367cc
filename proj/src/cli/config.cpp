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

#include "r2s/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace r2s::cli {
namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const char* type_label(const json& v) {
  if (v.is_boolean()) return "a boolean";
  if (v.is_number_unsigned()) return "a non-negative integer";
  if (v.is_number()) return "a number";
  if (v.is_string()) return "a string";
  if (v.is_array()) return "an array";
  return "an object";
}

bool same_kind(const json& def, const json& v) {
  if (def.is_number_unsigned()) return v.is_number_unsigned();
  if (def.is_number_float()) return v.is_number();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  return v.is_object();
}

// Rejects keys missing from the default document and type mismatches.
void check_against(const json& def, const json& doc, const std::string& path) {
  if (!same_kind(def, doc))
    throw ConfigError("config key '" + (path.empty() ? std::string("<root>") : path) + "' must be " +
                      type_label(def));
  if (!def.is_object()) return;
  for (const auto& [key, value] : doc.items()) {
    if (!def.contains(key)) throw ConfigError("unknown config key '" + join(path, key) + "'");
    check_against(def.at(key), value, join(path, key));
  }
}

template <typename Fn>
void rethrow_as_config(const std::string& section, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(section + ": " + e.what());
  }
}

void flatten(const json& j, const std::string& path, std::ostringstream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) flatten(value, join(path, key), out);
    return;
  }
  out << "  " << path << " = " << j.dump() << '\n';
}

}  // namespace

unet::TrainConfig RunConfig::train_config() const {
  unet::TrainConfig t;
  t.steps = train_steps;
  t.lr = train_lr;
  t.seed = seed;
  t.checkpoint_every = checkpoint_every;
  return t;
}

void RunConfig::validate() const {
  if (threads == 0) throw ConfigError("config key 'threads' must be at least 1");
  if (corpus.speech_dir.empty() && corpus.clips == 0)
    throw ConfigError("config key 'corpus.clips' must be at least 1");
  if (!(corpus.min_duration_s >= 1.0 && corpus.max_duration_s <= 10.0 &&
        corpus.min_duration_s <= corpus.max_duration_s))
    throw ConfigError("config keys 'corpus.min_duration_s' and 'corpus.max_duration_s' must satisfy "
                      "1 <= min <= max <= 10");
  for (const auto& [key, v] : {std::pair{"corpus.train", corpus.split.train}, std::pair{"corpus.test", corpus.split.test}})
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("config key '") + key + "' must lie in [0, 1]");
  if (std::abs(corpus.split.train + corpus.split.test - 1.0) > 1e-9)
    throw ConfigError("config keys 'corpus.train' and 'corpus.test' must sum to 1");
  rethrow_as_config("radar", [&] { radar.validate(); });
  rethrow_as_config("model", [&] { model.validate(); });
  if (train_steps == 0) throw ConfigError("config key 'train.steps' must be at least 1");
  if (!(train_lr > 0.0 && std::isfinite(train_lr)))
    throw ConfigError("config key 'train.lr' must be a positive number");
  if (eval_variants.empty()) throw ConfigError("config key 'eval.variants' must not be empty");
  for (std::size_t i = 0; i < eval_variants.size(); ++i)
    for (std::size_t k = 0; k < i; ++k)
      if (eval_variants[i] == eval_variants[k])
        throw ConfigError("config key 'eval.variants' lists " + std::string(metrics::variant_name(eval_variants[i])) +
                          " twice");
}

json to_json(const RunConfig& c) {
  json variants = json::array();
  for (auto v : c.eval_variants) variants.push_back(metrics::variant_name(v));
  return json{
      {"seed", c.seed},
      {"threads", c.threads},
      {"paths", {{"corpus", c.corpus_dir}, {"run", c.run_dir}}},
      {"corpus",
       {{"clips", c.corpus.clips},
        {"min_duration_s", c.corpus.min_duration_s},
        {"max_duration_s", c.corpus.max_duration_s},
        {"train", c.corpus.split.train},
        {"test", c.corpus.split.test},
        {"speech_dir", c.corpus.speech_dir}}},
      {"radar", json(c.radar)},
      {"model", json(c.model)},
      {"train", {{"steps", c.train_steps}, {"lr", c.train_lr}, {"checkpoint_every", c.checkpoint_every}}},
      {"eval", {{"variants", variants}}},
      {"infer", {{"variant", metrics::variant_name(c.infer_variant)}}},
  };
}

RunConfig config_from_json(const json& doc) {
  const json defaults = to_json(RunConfig{});
  check_against(defaults, doc, "");
  json merged = defaults;
  merged.merge_patch(doc);

  RunConfig c;
  c.seed = merged["seed"].get<std::uint64_t>();
  c.threads = merged["threads"].get<std::size_t>();
  c.corpus_dir = merged["paths"]["corpus"].get<std::string>();
  c.run_dir = merged["paths"]["run"].get<std::string>();
  const json& corpus = merged["corpus"];
  c.corpus.clips = corpus["clips"].get<std::size_t>();
  c.corpus.min_duration_s = corpus["min_duration_s"].get<double>();
  c.corpus.max_duration_s = corpus["max_duration_s"].get<double>();
  c.corpus.split.train = corpus["train"].get<double>();
  c.corpus.split.test = corpus["test"].get<double>();
  c.corpus.speech_dir = corpus["speech_dir"].get<std::string>();
  rethrow_as_config("radar", [&] { c.radar = merged["radar"].get<radar::RadarConfig>(); });
  rethrow_as_config("model", [&] { c.model = merged["model"].get<unet::RadioUNetConfig>(); });
  c.train_steps = merged["train"]["steps"].get<std::size_t>();
  c.train_lr = merged["train"]["lr"].get<double>();
  c.checkpoint_every = merged["train"]["checkpoint_every"].get<std::size_t>();
  c.eval_variants.clear();
  for (const auto& v : merged["eval"]["variants"]) {
    if (!v.is_string()) throw ConfigError("config key 'eval.variants' must list variant names");
    rethrow_as_config("eval.variants", [&] { c.eval_variants.push_back(metrics::parse_variant(v.get<std::string>())); });
  }
  rethrow_as_config("infer.variant",
                    [&] { c.infer_variant = metrics::parse_variant(merged["infer"]["variant"].get<std::string>()); });
  c.validate();
  return c;
}

RunConfig resolve_config(const std::optional<std::string>& config_path, const std::optional<std::string>& env_seed,
                         const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ConfigError("cannot read config file " + *config_path);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + *config_path + ": " + e.what());
    }
    check_against(to_json(RunConfig{}), doc, "");
  }
  if (env_seed) {
    std::uint64_t seed = 0;
    const char* end = env_seed->data() + env_seed->size();
    const auto [ptr, ec] = std::from_chars(env_seed->data(), end, seed);
    if (env_seed->empty() || ec != std::errc{} || ptr != end)
      throw ConfigError("R2S_SEED must be a non-negative integer, got '" + *env_seed + "'");
    doc["seed"] = seed;
  }

  const json defaults = to_json(RunConfig{});
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    const json::json_pointer ptr("/" + [&] {
      std::string p = key;
      std::replace(p.begin(), p.end(), '.', '/');
      return p;
    }());
    if (!defaults.contains(ptr) || defaults.at(ptr).is_object())
      throw ConfigError("unknown config key '" + key + "'");
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded() || (defaults.at(ptr).is_string() && !value.is_string())) value = text;
    doc[ptr] = std::move(value);
  }
  return config_from_json(doc);
}

std::string config_reference() {
  std::ostringstream out;
  flatten(to_json(RunConfig{}), "", out);
  return out.str();
}

}  // namespace r2s::cli
