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
#include <stdexcept>
#include <string>
#include <vector>

#include "r2s/dsp/waveform.hpp"

namespace r2s::dsp {

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Reads a mono 16-bit PCM little-endian RIFF/WAVE file. Unknown chunks are
/// skipped. Samples are scaled to [-1, 1).
Waveform read_wav(const std::filesystem::path& path);

/// Writes mono 16-bit PCM. Only 5100 Hz and 8000 Hz are accepted; samples are
/// clipped to [-1, 1] and rounded to the nearest code.
void write_wav(const std::filesystem::path& path, const Waveform& w);

/// Dense float matrix in the "R2SMEL1" dump layout: 7 magic bytes, u32 rows,
/// u32 cols (little-endian), then rows * cols f32 values row-major.
struct MatrixDump {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> values;
};

void write_matrix_dump(const std::filesystem::path& path, const MatrixDump& dump);
MatrixDump read_matrix_dump(const std::filesystem::path& path);

}  // namespace r2s::dsp
