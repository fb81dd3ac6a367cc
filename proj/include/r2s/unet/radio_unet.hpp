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

// Radio UNet: a convolutional encoder/decoder with frequency transformation
// layers after the input layer and every encoder level, and a stack of
// pre-norm Transformer layers at the bottleneck.

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "r2s/nn/params.hpp"
#include "r2s/nn/tensor.hpp"

namespace r2s::unet {

struct RadioUNetConfig {
  std::size_t enc_dec_levels = 3;
  std::size_t transformer_layers = 12;
  std::size_t token_patch = 1;
  std::size_t token_dim = 256;
  std::size_t heads = 4;
  std::size_t mlp_ratio = 4;
  std::size_t base_channels = 32;  // doubles from the second encoder level on
  std::size_t input_bands = 80;    // frequency extent F
  std::size_t input_frames = 80;   // time extent T
  bool use_transformer = true;
  bool use_ftl = true;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Channel count after the input layer (level 0) and after encoder level l.
  std::size_t channels(std::size_t level) const;

  /// Spatial extents (F, T) at a level; stride-2 convs round up.
  std::size_t bands_at(std::size_t level) const;
  std::size_t frames_at(std::size_t level) const;

  std::size_t token_count() const { return bands_at(enc_dec_levels) * frames_at(enc_dec_levels); }
};

void to_json(nlohmann::json& j, const RadioUNetConfig& c);
/// Missing keys keep their defaults; unknown keys throw std::invalid_argument.
void from_json(const nlohmann::json& j, RadioUNetConfig& c);

/// Registers and initializes every parameter for `cfg`.
template <typename T>
nn::ModelParams<T> init_params(const RadioUNetConfig& cfg, std::uint64_t seed);

/// Parameter count implied by the config alone (no allocation).
std::size_t parameter_count(const RadioUNetConfig& cfg);

/// Three 3x3 conv + relu layers, the learned frequency map W_tr on every
/// channel, then a 1x1 conv over concat(x, W_tr f_in). `prefix` names the
/// parameters ("<prefix>.conv1.weight", "<prefix>.w_tr", ...).
template <typename T>
nn::Tensor<T> ftl_block(const nn::ModelParams<T>& params, const std::string& prefix,
                        const nn::Tensor<T>& x);

/// x[N,C,H,W] -> tokens[N, H*W, D]: flatten, project, add the positional
/// embedding.
template <typename T>
nn::Tensor<T> tokenize(const nn::ModelParams<T>& params, const nn::Tensor<T>& x);

/// tokens[N, H*W, D] -> [N,C,H,W] through the output projection.
template <typename T>
nn::Tensor<T> detokenize(const nn::ModelParams<T>& params, const nn::Tensor<T>& tokens,
                         std::size_t h, std::size_t w);

struct ForwardOptions {
  // Replaces the bottleneck output with zeros (probe for the skip paths).
  bool zero_bottleneck = false;
};

/// m[N, 1, F, T] -> [N, 1, F, T]. Throws std::invalid_argument when the input
/// extents differ from the config.
template <typename T>
nn::Tensor<T> forward(const RadioUNetConfig& cfg, const nn::ModelParams<T>& params,
                      const nn::Tensor<T>& m, const ForwardOptions& options = {});

}  // namespace r2s::unet
