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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "nn_oracles.hpp"
#include "r2s/nn/ops.hpp"
#include "r2s/radar/corpus.hpp"
#include "r2s/unet/radio_unet.hpp"
#include "r2s/unet/training.hpp"
#include "temp_dir.hpp"

using namespace r2s;
using namespace r2s::unet;
using nn::Tensor;
using TD = Tensor<double>;
using TF = Tensor<float>;
namespace fs = std::filesystem;

namespace {

// Small enough for finite differences: 16x16 input, three levels down to
// 2x2 (4 tokens), two Transformer layers of width 32.
RadioUNetConfig tiny_config() {
  RadioUNetConfig cfg;
  cfg.input_bands = 16;
  cfg.input_frames = 16;
  cfg.base_channels = 4;
  cfg.token_dim = 32;
  cfg.heads = 4;
  cfg.transformer_layers = 2;
  return cfg;
}

// Full 80-band input but narrow, for training and inference plumbing.
RadioUNetConfig small_config() {
  RadioUNetConfig cfg;
  cfg.base_channels = 4;
  cfg.token_dim = 16;
  cfg.heads = 2;
  cfg.transformer_layers = 1;
  return cfg;
}

template <typename T>
Tensor<T> random_input(const nn::Shape& shape, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const auto v = oracle::random_values(nn::shape_numel(shape), gen);
  return Tensor<T>::from(shape, std::vector<T>(v.begin(), v.end()));
}

std::vector<double> values(const TD& t) { return {t.data().begin(), t.data().end()}; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Normalized pair of exactly `frames` frames with smooth synthetic content.
MelPair synthetic_pair(const std::string& id, std::size_t frames, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  MelPair p;
  p.id = id;
  for (auto* m : {&p.rf, &p.speech}) {
    m->frames = frames;
    m->values.resize(dsp::kMelBands * frames);
    for (double& v : m->values) v = d(gen);
    m->normalized = true;
  }
  return p;
}

// Corpus of `count` short synthetic clips, all in the train split.
radar::CorpusManifest small_corpus(const fs::path& root, std::size_t count, double seconds) {
  radar::SpeechSynthOptions opts;
  opts.min_duration_s = opts.max_duration_s = seconds;
  radar::SplitFractions split;
  split.train = 1.0;
  split.test = 0.0;
  return radar::build_corpus(radar::synthetic_clips(count, 21, opts), root, radar::RadarConfig{}, split);
}

// step,l1_loss columns of a loss log (wall-clock time dropped).
std::vector<std::string> loss_rows(const fs::path& csv) {
  std::ifstream in(csv);
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) rows.push_back(line.substr(0, line.rfind(',')));
  return rows;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults and derived geometry") {
    const RadioUNetConfig cfg;
    CHECK(cfg.enc_dec_levels == 3);
    CHECK(cfg.transformer_layers == 12);
    CHECK(cfg.token_dim == 256);
    CHECK(cfg.channels(0) == 32);
    CHECK(cfg.channels(1) == 32);
    CHECK(cfg.channels(2) == 64);
    CHECK(cfg.channels(3) == 128);
    CHECK(cfg.bands_at(1) == 40);
    CHECK(cfg.bands_at(3) == 10);
    CHECK(cfg.token_count() == 100);

    RadioUNetConfig odd;
    odd.input_bands = 20;
    CHECK(odd.bands_at(3) == 3);  // 20 -> 10 -> 5 -> 3
  }

  TEST_CASE("validation") {
    RadioUNetConfig cfg;
    cfg.heads = 3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.base_channels = 6;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.token_patch = 2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.use_transformer = false;
    cfg.heads = 3;  // ignored without a Transformer
    CHECK_NOTHROW(cfg.validate());
  }

  TEST_CASE("json round trip and strict keys") {
    RadioUNetConfig cfg = tiny_config();
    cfg.use_ftl = false;
    const nlohmann::json j = cfg;
    const auto back = j.get<RadioUNetConfig>();
    CHECK(nlohmann::json(back) == j);
    CHECK_THROWS_AS(nlohmann::json({{"depth", 4}}).get<RadioUNetConfig>(), std::invalid_argument);
    const auto partial = nlohmann::json({{"token_dim", 64}}).get<RadioUNetConfig>();
    CHECK(partial.token_dim == 64);
    CHECK(partial.transformer_layers == 12);
  }
}

TEST_SUITE("architecture") {
  TEST_CASE("default parameter count is pinned") {
    const RadioUNetConfig cfg;
    const auto params = init_params<float>(cfg, 0);
    CHECK(params.parameter_count() == parameter_count(cfg));
    CHECK(parameter_count(cfg) == 10414965);
    CHECK(params.contains("input.ftl.w_tr"));
    CHECK(params.at("input.ftl.w_tr").shape() == nn::Shape{80, 80});
    CHECK(params.at("enc3.ftl.w_tr").shape() == nn::Shape{10, 10});
    CHECK(params.at("bottleneck.pos_embed").shape() == nn::Shape{100, 256});
    CHECK(params.contains("bottleneck.layer11.mlp.fc2.weight"));
    CHECK_FALSE(params.contains("bottleneck.layer12.norm1.gamma"));
  }

  TEST_CASE("count depends only on the config") {
    RadioUNetConfig cfg = tiny_config();
    const std::size_t full = parameter_count(cfg);
    CHECK(init_params<double>(cfg, 1).parameter_count() == full);
    CHECK(init_params<double>(cfg, 2).parameter_count() == full);
    cfg.use_transformer = false;
    CHECK(parameter_count(cfg) < full);
    cfg.use_ftl = false;
    CHECK(init_params<double>(cfg, 1).parameter_count() == parameter_count(cfg));
  }

  TEST_CASE("default forward maps 80x80x1 to 80x80x1") {
    const RadioUNetConfig cfg;
    const auto params = init_params<float>(cfg, 3);
    nn::NoGradGuard guard;
    const TF x = random_input<float>({1, 1, 80, 80}, 4);
    const TF y = forward(cfg, params, x);
    CHECK(y.shape() == nn::Shape{1, 1, 80, 80});
    const TF again = forward(cfg, params, x);
    CHECK(std::equal(y.data().begin(), y.data().end(), again.data().begin()));
    CHECK_THROWS_AS(forward(cfg, params, random_input<float>({1, 1, 80, 40}, 5)), std::invalid_argument);
    CHECK_THROWS_AS(forward(cfg, params, random_input<float>({1, 2, 80, 80}, 5)), std::invalid_argument);
  }

  TEST_CASE("odd extents are cropped back on the way up") {
    RadioUNetConfig cfg = tiny_config();
    cfg.input_bands = 20;
    cfg.input_frames = 12;
    const auto params = init_params<double>(cfg, 1);
    const TD y = forward(cfg, params, random_input<double>({2, 1, 20, 12}, 2));
    CHECK(y.shape() == nn::Shape{2, 1, 20, 12});
  }

  TEST_CASE("tokenization") {
    const RadioUNetConfig cfg;
    auto params = init_params<double>(cfg, 0);
    const TD deep = random_input<double>({1, 128, 10, 10}, 6);
    CHECK(tokenize(params, deep).shape() == nn::Shape{1, 100, 256});

    for (double& v : params.at("bottleneck.pos_embed").data()) v = 0.0;
    const TD zeros = tokenize(params, TD::zeros({1, 128, 10, 10}));
    CHECK(std::all_of(zeros.data().begin(), zeros.data().end(), [](double v) { return v == 0.0; }));

    CHECK(values(nn::from_tokens(nn::to_tokens(deep), 10, 10)) == values(deep));
    CHECK(detokenize(params, tokenize(params, deep), 10, 10).shape() == deep.shape());
  }

  TEST_CASE("ablation without Transformer changes the output") {
    RadioUNetConfig full = tiny_config();
    RadioUNetConfig ablated = full;
    ablated.use_transformer = false;
    const auto pf = init_params<double>(full, 9);
    const auto pa = init_params<double>(ablated, 9);
    const TD x = random_input<double>({1, 1, 16, 16}, 10);
    const auto a = values(forward(full, pf, x));
    const auto b = values(forward(ablated, pa, x));
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    CHECK(diff > 1e-3);
  }

  TEST_CASE("skip connections carry signal past a zeroed bottleneck") {
    const RadioUNetConfig cfg = tiny_config();
    const auto params = init_params<double>(cfg, 11);
    ForwardOptions opts;
    opts.zero_bottleneck = true;
    const auto a = values(forward(cfg, params, random_input<double>({1, 1, 16, 16}, 12), opts));
    const auto b = values(forward(cfg, params, random_input<double>({1, 1, 16, 16}, 13), opts));
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    CHECK(diff > 1e-3);
  }
}

TEST_SUITE("ftl") {
  // Single-channel FTL whose convs pass the input through (centre tap 1),
  // so f_in equals a non-negative input exactly.
  nn::ModelParams<double> passthrough_ftl(std::size_t c, std::size_t f) {
    nn::ModelParams<double> p;
    for (const char* name : {"conv1", "conv2", "conv3"}) {
      TD w = TD::zeros({c, c, 3, 3});
      for (std::size_t i = 0; i < c; ++i) w.data()[((i * c + i) * 3 + 1) * 3 + 1] = 1.0;
      p.add(std::string("f.") + name + ".weight", w);
      p.add(std::string("f.") + name + ".bias", TD::zeros({c}));
    }
    TD eye = TD::zeros({f, f});
    for (std::size_t i = 0; i < f; ++i) eye.data()[i * f + i] = 1.0;
    p.add("f.w_tr", eye);
    p.add("f.fuse.weight", TD::zeros({c, 2 * c, 1, 1}));
    p.add("f.fuse.bias", TD::zeros({c}));
    return p;
  }

  TEST_CASE("identity transform with a first-operand fuse returns the input") {
    auto p = passthrough_ftl(2, 6);
    for (std::size_t i = 0; i < 2; ++i) p.at("f.fuse.weight").data()[i * 4 + i] = 1.0;
    const TD x = random_input<double>({1, 2, 6, 5}, 14);  // signed: the relu path is unused
    CHECK(values(ftl_block(p, "f", x)) == values(x));
  }

  TEST_CASE("row reversal flips a frequency ramp") {
    auto p = passthrough_ftl(1, 4);
    TD rev = TD::zeros({4, 4});
    for (std::size_t i = 0; i < 4; ++i) rev.data()[i * 4 + (3 - i)] = 1.0;
    p.at("f.w_tr") = rev;
    p.at("f.fuse.weight").data()[1] = 1.0;  // select the transformed operand
    std::vector<double> ramp;
    for (std::size_t fbin = 0; fbin < 4; ++fbin)
      for (std::size_t t = 0; t < 3; ++t) ramp.push_back(static_cast<double>(fbin));
    const TD y = ftl_block(p, "f", TD::from({1, 1, 4, 3}, ramp));
    for (std::size_t fbin = 0; fbin < 4; ++fbin)
      for (std::size_t t = 0; t < 3; ++t) CHECK(y.data()[fbin * 3 + t] == 3.0 - fbin);
  }

  TEST_CASE("shape mismatch with W_tr is an error") {
    const auto p = passthrough_ftl(1, 4);
    CHECK_THROWS_AS(ftl_block(p, "f", TD::zeros({1, 1, 5, 3})), std::invalid_argument);
  }

  TEST_CASE("dense W_tr mixes frequencies") {
    auto p = passthrough_ftl(2, 8);
    std::mt19937_64 gen(15);
    p.at("f.w_tr") = TD::from({8, 8}, oracle::random_values(64, gen));
    p.at("f.fuse.weight") = TD::from({2, 4, 1, 1}, oracle::random_values(8, gen));
    TD x = random_input<double>({1, 2, 8, 5}, 16);
    for (double& v : x.data()) v = std::abs(v) + 0.1;  // keep the relus open
    const auto base = values(ftl_block(p, "f", x));
    for (std::size_t row : {0u, 3u, 7u}) {
      TD bumped = TD::from(x.shape(), values(x));
      bumped.data()[row * 5 + 2] += 1e-3;  // channel 0, frequency `row`, t = 2
      const auto out = values(ftl_block(p, "f", bumped));
      std::size_t moved = 0;
      for (std::size_t j = 0; j < 8; ++j)
        if (j != row && std::abs(out[j * 5 + 2] - base[j * 5 + 2]) > 1e-9) ++moved;
      CHECK(moved == 7);
    }
  }
}

TEST_SUITE("gradients") {
  TEST_CASE("end-to-end finite differences on a tiny model") {
    const RadioUNetConfig cfg = tiny_config();
    auto params = init_params<double>(cfg, 17);
    const TD x = random_input<double>({1, 1, 16, 16}, 18);
    const TD target = random_input<double>({1, 1, 16, 16}, 19);
    auto loss = [&] { return nn::l1_loss(forward(cfg, params, x), target); };

    loss().backward();
    std::vector<std::string> paths;
    for (const auto& [path, t] : params) paths.push_back(path);
    std::mt19937_64 gen(20);
    std::shuffle(paths.begin(), paths.end(), gen);
    paths.resize(20);

    const double h = 1e-6;
    double worst = 0.0;
    nn::NoGradGuard guard;
    for (const auto& path : paths) {
      TD& t = params.at(path);
      const std::size_t i = std::uniform_int_distribution<std::size_t>(0, t.numel() - 1)(gen);
      const double analytic = t.grad()[i];
      const double saved = t.data()[i];
      t.data()[i] = saved + h;
      const double up = loss().item();
      t.data()[i] = saved - h;
      const double down = loss().item();
      t.data()[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      INFO(path << "[" << i << "] analytic " << analytic << " numeric " << numeric);
      CHECK(rel < 1e-3);
      worst = std::max(worst, rel);
    }
    MESSAGE("worst relative error over 20 parameters: " << worst);
  }
}

TEST_SUITE("normalization") {
  TEST_CASE("round trip and guards") {
    dsp::MelSpectrogram m;
    m.frames = 3;
    m.values = {-10.0, -3.5, 0.0, 1.25, 2.0, -7.0};
    m.bands = 2;
    const auto n = normalize(m, -2.0, 3.0);
    CHECK(n.normalized);
    CHECK(n.values[0] == doctest::Approx(-8.0 / 3.0));
    const auto back = denormalize(n, -2.0, 3.0);
    for (std::size_t i = 0; i < m.values.size(); ++i) CHECK(std::abs(back.values[i] - m.values[i]) < 1e-6);
    CHECK_THROWS_AS(normalize(n, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(denormalize(m, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(normalize(m, 0.0, 0.0), std::invalid_argument);
  }

  TEST_CASE("stats are the global mean and deviation") {
    MelPair a = synthetic_pair("a", 2, 1), b = synthetic_pair("b", 2, 2);
    for (auto* p : {&a, &b}) p->rf.normalized = p->speech.normalized = false;
    std::fill(a.rf.values.begin(), a.rf.values.end(), 1.0);
    std::fill(b.rf.values.begin(), b.rf.values.end(), 3.0);
    const std::vector<MelPair> pairs{a, b};
    const NormStats s = compute_norm_stats(pairs);
    CHECK(s.rf_mean == doctest::Approx(2.0));
    CHECK(s.rf_std == doctest::Approx(1.0));
    CHECK_THROWS_AS(compute_norm_stats(std::vector<MelPair>{}), std::invalid_argument);
  }
}

TEST_SUITE("training") {
  TEST_CASE("crops are a pure function of seed and step") {
    const std::vector<MelPair> pairs{synthetic_pair("a", 100, 1), synthetic_pair("b", 80, 2)};
    for (std::size_t step = 0; step < 50; ++step) {
      const Crop c = sample_crop(7, step, pairs, 80);
      const Crop again = sample_crop(7, step, pairs, 80);
      CHECK(c.clip == again.clip);
      CHECK(c.offset == again.offset);
      CHECK(c.offset + 80 <= pairs[c.clip].rf.frames);
    }
  }

  TEST_CASE("lr = 0 keeps the loss constant") {
    const std::vector<MelPair> pairs{synthetic_pair("a", 80, 3)};
    TrainConfig tc;
    tc.lr = 0.0;
    TrainingState st = init_training_state(small_config(), tc, {});
    std::vector<double> losses;
    train_steps(st, pairs, 4, [&](const LossRecord& r, const TrainingState&) { losses.push_back(r.l1_loss); });
    REQUIRE(losses.size() == 4);
    for (double l : losses) CHECK(l == losses.front());
    CHECK(st.step == 4);
  }

  TEST_CASE("same seed gives the same loss curve") {
    const std::vector<MelPair> pairs{synthetic_pair("a", 90, 4), synthetic_pair("b", 85, 5)};
    auto curve = [&] {
      TrainingState st = init_training_state(small_config(), TrainConfig{}, {});
      std::vector<double> losses;
      train_steps(st, pairs, 5, [&](const LossRecord& r, const TrainingState&) { losses.push_back(r.l1_loss); });
      return losses;
    };
    const auto a = curve();
    CHECK(a == curve());
    CHECK(a.front() != a.back());
  }

  TEST_CASE("input errors") {
    TrainingState st = init_training_state(small_config(), TrainConfig{}, {});
    CHECK_THROWS_WITH_AS(train_steps(st, std::vector<MelPair>{}, 1), "training set is empty",
                         std::invalid_argument);
    const std::vector<MelPair> short_clip{synthetic_pair("s", 79, 6)};
    CHECK_THROWS_AS(train_steps(st, short_clip, 1), std::invalid_argument);
    TrainConfig bad;
    bad.lr = -1.0;
    CHECK_THROWS_AS(init_training_state(small_config(), bad, {}), std::invalid_argument);
  }

  TEST_CASE("run, checkpoint and resume") {
    TempDir corpus("r2s_unet_corpus"), straight("r2s_unet_straight"), resumed("r2s_unet_resumed");
    small_corpus(corpus.path, 3, 1.5);
    TrainConfig tc;
    tc.steps = 6;
    tc.checkpoint_every = 3;
    tc.seed = 5;

    const auto records = run_training(corpus.path, straight.path, small_config(), tc);
    CHECK(records.size() == 6);
    CHECK(fs::exists(straight.path / "checkpoints" / "step_000003" / "model.ckpt"));
    CHECK(fs::exists(straight.path / "checkpoints" / "step_000003" / "state.json"));
    const auto rows = loss_rows(straight.path / "loss.csv");
    REQUIRE(rows.size() == 7);
    CHECK(rows.front() == "step,l1_loss");

    TrainConfig first = tc;
    first.steps = 3;
    run_training(corpus.path, resumed.path, small_config(), first);
    // A stray row past the saved state must be dropped on resume.
    std::ofstream(resumed.path / "loss.csv", std::ios::app) << "4,0.5,1.0\n";
    run_training(corpus.path, resumed.path, small_config(), tc, true);

    CHECK(loss_rows(resumed.path / "loss.csv") == rows);
    CHECK(slurp(resumed.path / "model.ckpt") == slurp(straight.path / "model.ckpt"));

    const TrainingState loaded = load_state(straight.path);
    CHECK(loaded.step == 6);
    CHECK(loaded.seed == 5);
    CHECK(nlohmann::json(loaded.model) == nlohmann::json(small_config()));
    CHECK(loaded.norm.rf_std > 0.0);
  }

  TEST_CASE("missing artifacts are reported") {
    TempDir dir("r2s_unet_missing");
    CHECK_THROWS_AS(load_state(dir.path), std::runtime_error);
    CHECK_THROWS_AS(run_training(dir.path, dir.path / "out", small_config(), TrainConfig{}),
                    std::runtime_error);
  }
}

TEST_SUITE("inference") {
  TEST_CASE("window arithmetic") {
    CHECK(window_starts(80, 80, 40) == std::vector<std::size_t>{0});
    CHECK(window_starts(160, 80, 40) == std::vector<std::size_t>{0, 40, 80});
    CHECK(window_starts(150, 80, 40) == std::vector<std::size_t>{0, 40, 70});
    CHECK_THROWS_AS(window_starts(79, 80, 40), std::invalid_argument);
  }

  TEST_CASE("cross-fade is a convex blend") {
    const std::vector<std::size_t> starts{0, 2};
    const std::vector<std::vector<double>> same{std::vector<double>(4, 0.3), std::vector<double>(4, 0.3)};
    for (double v : cross_fade(same, starts, 1, 4, 6)) CHECK(v == 0.3);

    const std::vector<std::vector<double>> steps{std::vector<double>(4, 0.0), std::vector<double>(4, 3.0)};
    // Overlap of two frames: weights 1/3 and 2/3 on the incoming window.
    CHECK(cross_fade(steps, starts, 1, 4, 6) == std::vector<double>{0.0, 0.0, 1.0, 2.0, 3.0, 3.0});
    CHECK_THROWS_AS(cross_fade(steps, std::vector<std::size_t>{0, 5}, 1, 4, 9), std::invalid_argument);
  }

  TEST_CASE("trace lengths map to window counts") {
    TrainingState st = init_training_state(small_config(), TrainConfig{}, NormStats{-1.0, 1.5, -2.0, 2.0});
    auto trace = [](double seconds) {
      const auto n = static_cast<std::size_t>(std::llround(seconds * dsp::kRadarRateHz));
      dsp::Waveform w{std::vector<double>(n), dsp::kRadarRateHz};
      for (std::size_t i = 0; i < n; ++i) w.samples[i] = std::sin(0.05 * i) + 0.3 * std::sin(0.31 * i);
      return w;
    };
    const auto one = infer(trace(1.28), st);
    CHECK(one.frames == 80);
    CHECK(one.bands == 80);
    CHECK_FALSE(one.normalized);
    const auto three = infer(trace(2.56), st);
    CHECK(three.frames == 160);
    for (double v : three.values) CHECK(v >= dsp::kLogFloor);
    CHECK_THROWS_AS(infer(trace(1.0), st), std::invalid_argument);
  }
}
