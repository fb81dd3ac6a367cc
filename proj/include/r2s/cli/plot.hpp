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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "r2s/dsp/audio_io.hpp"

namespace r2s::cli {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB raster, row-major from the top-left pixel.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;

  Rgb& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  const Rgb& at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

/// Viridis lookup for t in [0, 1] over 256 entries; values outside the range
/// are clamped.
Rgb viridis(double t);

/// Side of the square block each Mel cell occupies in a heatmap.
inline constexpr std::size_t kCellPixels = 4;

/// Heatmap of a [bands x frames] dump: time runs left to right, band 0 sits
/// at the bottom, and values map linearly from the dump minimum (colormap
/// start) to its maximum (end). A constant dump renders in the start color.
/// The image is frames * 4 by bands * 4 pixels.
Image render_mel(const dsp::MatrixDump& dump);

struct LossPoint {
  std::size_t step = 0;
  double l1_loss = 0.0;
};

/// Reads the step and l1_loss columns of a training loss log. Throws
/// dsp::FormatError with the byte offset of the first malformed field.
std::vector<LossPoint> read_loss_csv(const std::filesystem::path& path);

inline constexpr std::size_t kLossPlotWidth = 640;
inline constexpr std::size_t kLossPlotHeight = 360;

/// Loss curve on a log10 loss axis over a white background with plain axes.
Image render_loss(std::span<const LossPoint> points);

/// Binary PPM (P6).
void write_ppm(const std::filesystem::path& path, const Image& image);

}  // namespace r2s::cli
