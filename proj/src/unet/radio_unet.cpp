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

#include "r2s/unet/radio_unet.hpp"

#include <cstdio>
#include <stdexcept>
#include <utility>
#include <vector>

#include "r2s/nn/ops.hpp"

namespace r2s::unet {

using nn::ModelParams;
using nn::Tensor;

namespace {

constexpr std::size_t kKernel = 3;

std::string layer_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "bottleneck.layer%02zu", i);
  return buf;
}

void invalid(const std::string& field, const std::string& why) {
  throw std::invalid_argument("RadioUNetConfig." + field + ": " + why);
}

// Parameter shapes in registration order, shared by init_params() and
// parameter_count() so the two cannot drift.
struct ParamSpec {
  enum class Init { kaiming, xavier, zeros, ones, normal };
  std::string path;
  nn::Shape shape;
  Init init;
  std::size_t fan_in = 0, fan_out = 0;
};

std::vector<ParamSpec> param_specs(const RadioUNetConfig& cfg) {
  using Init = ParamSpec::Init;
  std::vector<ParamSpec> specs;
  auto conv = [&](const std::string& name, std::size_t co, std::size_t ci, std::size_t k) {
    specs.push_back({name + ".weight", {co, ci, k, k}, Init::kaiming, ci * k * k, 0});
    specs.push_back({name + ".bias", {co}, Init::zeros});
  };
  auto linear = [&](const std::string& name, std::size_t out, std::size_t in) {
    specs.push_back({name + ".weight", {out, in}, Init::xavier, in, out});
    specs.push_back({name + ".bias", {out}, Init::zeros});
  };
  auto norm = [&](const std::string& name, std::size_t d) {
    specs.push_back({name + ".gamma", {d}, Init::ones});
    specs.push_back({name + ".beta", {d}, Init::zeros});
  };
  auto ftl = [&](const std::string& prefix, std::size_t c, std::size_t f) {
    conv(prefix + ".conv1", c, c, kKernel);
    conv(prefix + ".conv2", c, c, kKernel);
    conv(prefix + ".conv3", c, c, kKernel);
    specs.push_back({prefix + ".w_tr", {f, f}, Init::xavier, f, f});
    conv(prefix + ".fuse", c, 2 * c, 1);
  };

  conv("input.conv", cfg.channels(0), 1, kKernel);
  if (cfg.use_ftl) ftl("input.ftl", cfg.channels(0), cfg.bands_at(0));
  for (std::size_t l = 1; l <= cfg.enc_dec_levels; ++l) {
    const std::string name = "enc" + std::to_string(l);
    conv(name + ".conv", cfg.channels(l), cfg.channels(l - 1), kKernel);
    if (cfg.use_ftl) ftl(name + ".ftl", cfg.channels(l), cfg.bands_at(l));
  }

  if (cfg.use_transformer) {
    const std::size_t c = cfg.channels(cfg.enc_dec_levels), d = cfg.token_dim;
    linear("bottleneck.proj_in", d, c);
    specs.push_back({"bottleneck.pos_embed", {cfg.token_count(), d}, Init::normal});
    for (std::size_t i = 0; i < cfg.transformer_layers; ++i) {
      const std::string name = layer_name(i);
      norm(name + ".norm1", d);
      for (const char* p : {"q", "k", "v", "o"}) linear(name + ".attn." + p, d, d);
      norm(name + ".norm2", d);
      linear(name + ".mlp.fc1", d * cfg.mlp_ratio, d);
      linear(name + ".mlp.fc2", d, d * cfg.mlp_ratio);
    }
    norm("bottleneck.norm", d);
    linear("bottleneck.proj_out", c, d);
  }

  for (std::size_t l = cfg.enc_dec_levels; l >= 1; --l) {
    const std::size_t up = cfg.channels(l) / 4;
    conv("dec" + std::to_string(l) + ".conv", cfg.channels(l - 1), up + cfg.channels(l - 1), kKernel);
  }
  conv("output.conv", 1, cfg.channels(0), kKernel);
  return specs;
}

template <typename T>
Tensor<T> conv(const ModelParams<T>& p, const std::string& name, const Tensor<T>& x,
               std::size_t stride = 1) {
  return nn::conv2d(x, p.at(name + ".weight"), p.at(name + ".bias"), stride);
}

template <typename T>
Tensor<T> conv_relu(const ModelParams<T>& p, const std::string& name, const Tensor<T>& x,
                    std::size_t stride = 1) {
  return nn::relu(conv(p, name, x, stride));
}

template <typename T>
Tensor<T> linear(const ModelParams<T>& p, const std::string& name, const Tensor<T>& x) {
  return nn::linear(x, p.at(name + ".weight"), p.at(name + ".bias"));
}

template <typename T>
Tensor<T> norm(const ModelParams<T>& p, const std::string& name, const Tensor<T>& x) {
  return nn::layer_norm(x, p.at(name + ".gamma"), p.at(name + ".beta"));
}

template <typename T>
Tensor<T> transformer_layer(const RadioUNetConfig& cfg, const ModelParams<T>& p,
                            const std::string& name, const Tensor<T>& x) {
  const std::string a = name + ".attn.";
  const nn::AttentionWeights<T> w{p.at(a + "q.weight"), p.at(a + "q.bias"), p.at(a + "k.weight"),
                                  p.at(a + "k.bias"),   p.at(a + "v.weight"), p.at(a + "v.bias"),
                                  p.at(a + "o.weight"), p.at(a + "o.bias")};
  const Tensor<T> h = nn::add(x, nn::multihead_attention(norm(p, name + ".norm1", x), w, cfg.heads));
  const Tensor<T> m = nn::gelu(linear(p, name + ".mlp.fc1", norm(p, name + ".norm2", h)));
  return nn::add(h, linear(p, name + ".mlp.fc2", m));
}

}  // namespace

void RadioUNetConfig::validate() const {
  if (enc_dec_levels == 0) invalid("enc_dec_levels", "must be positive");
  if (token_patch != 1) invalid("token_patch", "only patch size 1 is supported");
  if (base_channels == 0 || base_channels % 4 != 0)
    invalid("base_channels", "must be a positive multiple of 4 (pixel shuffle by 2)");
  if (input_bands == 0 || input_frames == 0) invalid("input_bands", "extents must be positive");
  if (use_transformer) {
    if (transformer_layers == 0) invalid("transformer_layers", "must be positive");
    if (token_dim == 0) invalid("token_dim", "must be positive");
    if (heads == 0 || token_dim % heads != 0) invalid("heads", "must divide token_dim");
    if (mlp_ratio == 0) invalid("mlp_ratio", "must be positive");
  }
}

std::size_t RadioUNetConfig::channels(std::size_t level) const {
  return level == 0 ? base_channels : base_channels << (level - 1);
}

std::size_t RadioUNetConfig::bands_at(std::size_t level) const {
  std::size_t f = input_bands;
  for (std::size_t l = 0; l < level; ++l) f = (f + 1) / 2;
  return f;
}

std::size_t RadioUNetConfig::frames_at(std::size_t level) const {
  std::size_t t = input_frames;
  for (std::size_t l = 0; l < level; ++l) t = (t + 1) / 2;
  return t;
}

void to_json(nlohmann::json& j, const RadioUNetConfig& c) {
  j = {{"enc_dec_levels", c.enc_dec_levels},
       {"transformer_layers", c.transformer_layers},
       {"token_patch", c.token_patch},
       {"token_dim", c.token_dim},
       {"heads", c.heads},
       {"mlp_ratio", c.mlp_ratio},
       {"base_channels", c.base_channels},
       {"input_bands", c.input_bands},
       {"input_frames", c.input_frames},
       {"use_transformer", c.use_transformer},
       {"use_ftl", c.use_ftl}};
}

void from_json(const nlohmann::json& j, RadioUNetConfig& c) {
  nlohmann::json defaults;
  to_json(defaults, c);
  for (const auto& [key, value] : j.items())
    if (!defaults.contains(key)) throw std::invalid_argument("unknown model key: " + key);
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("enc_dec_levels", c.enc_dec_levels);
  get("transformer_layers", c.transformer_layers);
  get("token_patch", c.token_patch);
  get("token_dim", c.token_dim);
  get("heads", c.heads);
  get("mlp_ratio", c.mlp_ratio);
  get("base_channels", c.base_channels);
  get("input_bands", c.input_bands);
  get("input_frames", c.input_frames);
  get("use_transformer", c.use_transformer);
  get("use_ftl", c.use_ftl);
}

template <typename T>
ModelParams<T> init_params(const RadioUNetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ModelParams<T> params;
  for (const auto& s : param_specs(cfg)) {
    switch (s.init) {
      case ParamSpec::Init::kaiming:
        params.add(s.path, nn::kaiming_uniform<T>(s.shape, s.fan_in, seed, s.path));
        break;
      case ParamSpec::Init::xavier:
        params.add(s.path, nn::xavier_uniform<T>(s.shape, s.fan_in, s.fan_out, seed, s.path));
        break;
      case ParamSpec::Init::zeros:
        params.add(s.path, Tensor<T>::zeros(s.shape));
        break;
      case ParamSpec::Init::ones:
        params.add(s.path, Tensor<T>::full(s.shape, T(1)));
        break;
      case ParamSpec::Init::normal:
        params.add(s.path, nn::normal_init<T>(s.shape, 0.02, seed, s.path));
        break;
    }
  }
  return params;
}

std::size_t parameter_count(const RadioUNetConfig& cfg) {
  cfg.validate();
  std::size_t n = 0;
  for (const auto& s : param_specs(cfg)) n += nn::shape_numel(s.shape);
  return n;
}

template <typename T>
Tensor<T> ftl_block(const ModelParams<T>& params, const std::string& prefix, const Tensor<T>& x) {
  Tensor<T> f = conv_relu(params, prefix + ".conv1", x);
  f = conv_relu(params, prefix + ".conv2", f);
  f = conv_relu(params, prefix + ".conv3", f);
  const Tensor<T> f_out = nn::freq_transform(f, params.at(prefix + ".w_tr"));
  return conv(params, prefix + ".fuse", nn::concat_channels(x, f_out));
}

template <typename T>
Tensor<T> tokenize(const ModelParams<T>& params, const Tensor<T>& x) {
  const Tensor<T> tokens = linear(params, "bottleneck.proj_in", nn::to_tokens(x));
  return nn::add(tokens, params.at("bottleneck.pos_embed"));
}

template <typename T>
Tensor<T> detokenize(const ModelParams<T>& params, const Tensor<T>& tokens, std::size_t h,
                     std::size_t w) {
  return nn::from_tokens(linear(params, "bottleneck.proj_out", tokens), h, w);
}

template <typename T>
Tensor<T> forward(const RadioUNetConfig& cfg, const ModelParams<T>& params, const Tensor<T>& m,
                  const ForwardOptions& options) {
  if (m.rank() != 4 || m.dim(1) != 1 || m.dim(2) != cfg.input_bands || m.dim(3) != cfg.input_frames)
    throw std::invalid_argument("forward: expected [N, 1, " + std::to_string(cfg.input_bands) + ", " +
                                std::to_string(cfg.input_frames) + "] input, got " +
                                nn::shape_str(m.shape()));

  std::vector<Tensor<T>> skips;
  Tensor<T> x = conv_relu(params, "input.conv", m);
  if (cfg.use_ftl) x = ftl_block(params, "input.ftl", x);
  for (std::size_t l = 1; l <= cfg.enc_dec_levels; ++l) {
    skips.push_back(x);
    const std::string name = "enc" + std::to_string(l);
    x = conv_relu(params, name + ".conv", x, 2);
    if (cfg.use_ftl) x = ftl_block(params, name + ".ftl", x);
  }

  const std::size_t h = x.dim(2), w = x.dim(3);
  if (options.zero_bottleneck) {
    x = Tensor<T>::zeros(x.shape());
  } else if (cfg.use_transformer) {
    Tensor<T> tokens = tokenize(params, x);
    for (std::size_t i = 0; i < cfg.transformer_layers; ++i)
      tokens = transformer_layer(cfg, params, layer_name(i), tokens);
    x = detokenize(params, norm(params, "bottleneck.norm", tokens), h, w);
  }

  for (std::size_t l = cfg.enc_dec_levels; l >= 1; --l) {
    const Tensor<T>& skip = skips[l - 1];
    Tensor<T> up = nn::pixel_shuffle(x, 2);
    if (up.dim(2) != skip.dim(2) || up.dim(3) != skip.dim(3))
      up = nn::crop_spatial(up, skip.dim(2), skip.dim(3));
    x = conv_relu(params, "dec" + std::to_string(l) + ".conv", nn::concat_channels(up, skip));
  }
  return conv(params, "output.conv", x);
}

#define R2S_INSTANTIATE(T)                                                                         \
  template ModelParams<T> init_params<T>(const RadioUNetConfig&, std::uint64_t);                   \
  template Tensor<T> ftl_block(const ModelParams<T>&, const std::string&, const Tensor<T>&);       \
  template Tensor<T> tokenize(const ModelParams<T>&, const Tensor<T>&);                            \
  template Tensor<T> detokenize(const ModelParams<T>&, const Tensor<T>&, std::size_t, std::size_t); \
  template Tensor<T> forward(const RadioUNetConfig&, const ModelParams<T>&, const Tensor<T>&,      \
                             const ForwardOptions&);

R2S_INSTANTIATE(float)
R2S_INSTANTIATE(double)
#undef R2S_INSTANTIATE

}  // namespace r2s::unet
