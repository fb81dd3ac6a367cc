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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "r2s/nn/tensor.hpp"

namespace r2s::nn {

/// Trainable parameters keyed by path ("enc1.conv.weight"). Iteration is in
/// sorted path order, so anything derived from it is deterministic.
template <typename T>
class ModelParams {
 public:
  using Map = std::map<std::string, Tensor<T>>;

  /// Registers a trainable tensor. Throws std::logic_error on a duplicate path.
  const Tensor<T>& add(const std::string& path, Tensor<T> tensor);

  // Throws std::out_of_range naming the path.
  const Tensor<T>& at(const std::string& path) const;
  Tensor<T>& at(const std::string& path);
  bool contains(const std::string& path) const { return map_.count(path) != 0; }

  std::size_t size() const { return map_.size(); }
  std::size_t parameter_count() const;
  void clear_grads();

  typename Map::const_iterator begin() const { return map_.begin(); }
  typename Map::const_iterator end() const { return map_.end(); }
  typename Map::iterator begin() { return map_.begin(); }
  typename Map::iterator end() { return map_.end(); }

 private:
  Map map_;
};

/// Weight initializers. Each tensor draws from its own counter stream keyed
/// by (seed, path), so values do not depend on registration order.
template <typename T>
Tensor<T> kaiming_uniform(const Shape& shape, std::size_t fan_in, std::uint64_t seed,
                          const std::string& path);
template <typename T>
Tensor<T> xavier_uniform(const Shape& shape, std::size_t fan_in, std::size_t fan_out,
                         std::uint64_t seed, const std::string& path);
template <typename T>
Tensor<T> normal_init(const Shape& shape, double stddev, std::uint64_t seed, const std::string& path);

/// p <- p - lr * grad(p) for every parameter, then drops the gradients.
/// Throws std::logic_error if any parameter has no gradient.
template <typename T>
void sgd_step(ModelParams<T>& params, double lr);

/// Element-type conversion (used to run float models in double precision).
template <typename To, typename From>
ModelParams<To> convert_params(const ModelParams<From>& params);

/// Binary checkpoint: "R2SCKPT1", u32 count, then per tensor u32 path length,
/// path bytes, u32 rank, u32 extents, f32 data (all little-endian).
void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params);

/// Loads values into an existing parameter set. Paths and shapes must match
/// exactly; throws std::runtime_error otherwise.
void load_checkpoint(const std::filesystem::path& path, ModelParams<float>& params);

}  // namespace r2s::nn
