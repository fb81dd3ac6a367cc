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

#include "r2s/nn/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "r2s/prng.hpp"

namespace r2s::nn {
namespace {

constexpr char kMagic[8] = {'R', '2', 'S', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian");

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& in, const std::string& what) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) throw std::runtime_error("checkpoint truncated in " + what);
  return v;
}

}  // namespace

template <typename T>
const Tensor<T>& ModelParams<T>::add(const std::string& path, Tensor<T> tensor) {
  if (map_.count(path)) throw std::logic_error("parameter registered twice: " + path);
  tensor.set_requires_grad(true);
  return map_.emplace(path, std::move(tensor)).first->second;
}

template <typename T>
const Tensor<T>& ModelParams<T>::at(const std::string& path) const {
  auto it = map_.find(path);
  if (it == map_.end()) throw std::out_of_range("unknown parameter: " + path);
  return it->second;
}

template <typename T>
Tensor<T>& ModelParams<T>::at(const std::string& path) {
  auto it = map_.find(path);
  if (it == map_.end()) throw std::out_of_range("unknown parameter: " + path);
  return it->second;
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : map_) n += t.numel();
  return n;
}

template <typename T>
void ModelParams<T>::clear_grads() {
  for (auto& [_, t] : map_) t.clear_grad();
}

template <typename T>
Tensor<T> kaiming_uniform(const Shape& shape, std::size_t fan_in, std::uint64_t seed,
                          const std::string& path) {
  // He initialization for ReLU layers: U(-b, b) with b = sqrt(6 / fan_in).
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  CounterRng rng(seed, stream_id(path));
  std::vector<T> data(shape_numel(shape));
  for (T& v : data) v = static_cast<T>(rng.uniform(-bound, bound));
  return Tensor<T>::from(shape, std::move(data), true);
}

template <typename T>
Tensor<T> xavier_uniform(const Shape& shape, std::size_t fan_in, std::size_t fan_out,
                         std::uint64_t seed, const std::string& path) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  CounterRng rng(seed, stream_id(path));
  std::vector<T> data(shape_numel(shape));
  for (T& v : data) v = static_cast<T>(rng.uniform(-bound, bound));
  return Tensor<T>::from(shape, std::move(data), true);
}

template <typename T>
Tensor<T> normal_init(const Shape& shape, double stddev, std::uint64_t seed, const std::string& path) {
  CounterRng rng(seed, stream_id(path));
  std::vector<T> data(shape_numel(shape));
  for (T& v : data) v = static_cast<T>(stddev * rng.normal());
  return Tensor<T>::from(shape, std::move(data), true);
}

template <typename T>
void sgd_step(ModelParams<T>& params, double lr) {
  for (const auto& [path, t] : params)
    if (!t.has_grad()) throw std::logic_error("missing gradient for parameter " + path);
  const T step = static_cast<T>(lr);
  for (auto& [path, t] : params) {
    auto data = t.data();
    auto grad = t.grad();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] -= step * grad[i];
    for (T v : data)
      if (!std::isfinite(v)) throw std::domain_error("non-finite parameter after update: " + path);
    t.clear_grad();
  }
}

template <typename To, typename From>
ModelParams<To> convert_params(const ModelParams<From>& params) {
  ModelParams<To> out;
  for (const auto& [path, t] : params) {
    std::vector<To> data(t.data().begin(), t.data().end());
    out.add(path, Tensor<To>::from(t.shape(), std::move(data), true));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.data().data()),
              static_cast<std::streamsize>(t.numel() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, ModelParams<float>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint (bad magic): " + path.string());
  const std::uint32_t count = get_u32(in, "header");
  if (count != params.size())
    throw std::runtime_error("checkpoint has " + std::to_string(count) + " tensors, model has " +
                             std::to_string(params.size()));
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = get_u32(in, "path length");
    if (len > 4096) throw std::runtime_error("checkpoint path length implausible");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw std::runtime_error("checkpoint truncated in path");
    if (!params.contains(name)) throw std::runtime_error("checkpoint tensor not in model: " + name);
    Tensor<float>& t = params.at(name);
    const std::uint32_t rank = get_u32(in, name);
    Shape shape(rank);
    for (auto& d : shape) d = get_u32(in, name);
    if (shape != t.shape())
      throw std::runtime_error("checkpoint shape " + shape_str(shape) + " for " + name +
                               " does not match model " + shape_str(t.shape()));
    if (!in.read(reinterpret_cast<char*>(t.data().data()),
                 static_cast<std::streamsize>(t.numel() * sizeof(float))))
      throw std::runtime_error("checkpoint truncated in data of " + name);
    t.clear_grad();
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("trailing bytes after checkpoint data");
}

template class ModelParams<float>;
template class ModelParams<double>;
template Tensor<float> kaiming_uniform(const Shape&, std::size_t, std::uint64_t, const std::string&);
template Tensor<double> kaiming_uniform(const Shape&, std::size_t, std::uint64_t, const std::string&);
template Tensor<float> xavier_uniform(const Shape&, std::size_t, std::size_t, std::uint64_t,
                                      const std::string&);
template Tensor<double> xavier_uniform(const Shape&, std::size_t, std::size_t, std::uint64_t,
                                       const std::string&);
template Tensor<float> normal_init(const Shape&, double, std::uint64_t, const std::string&);
template Tensor<double> normal_init(const Shape&, double, std::uint64_t, const std::string&);
template void sgd_step(ModelParams<float>&, double);
template void sgd_step(ModelParams<double>&, double);
template ModelParams<double> convert_params(const ModelParams<float>&);
template ModelParams<float> convert_params(const ModelParams<double>&);

}  // namespace r2s::nn
