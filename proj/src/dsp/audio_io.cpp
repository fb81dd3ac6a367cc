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

#include "r2s/dsp/audio_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace r2s::dsp {
namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

constexpr std::array<char, 7> kMelMagic = {'R', '2', 'S', 'M', 'E', 'L', '1'};

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t offset, const char* what) {
  if (offset + sizeof(T) > buf.size())
    throw FormatError(std::string("truncated while reading ") + what, offset);
  T v;
  std::memcpy(&v, buf.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  const std::vector<char> buf = slurp(path);
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw FormatError(path.string() + ": not a RIFF/WAVE file", 0);

  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint32_t rate = 0;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const auto size = read_le<std::uint32_t>(buf, pos + 4, "chunk size");
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      const auto format = read_le<std::uint16_t>(buf, body, "format tag");
      const auto channels = read_le<std::uint16_t>(buf, body + 2, "channel count");
      rate = read_le<std::uint32_t>(buf, body + 4, "sample rate");
      const auto bits = read_le<std::uint16_t>(buf, body + 14, "bits per sample");
      if (format != 1 || channels != 1 || bits != 16)
        throw FormatError(path.string() + ": only mono 16-bit PCM is supported", body);
      if (rate == 0) throw FormatError(path.string() + ": zero sample rate", body + 4);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError(path.string() + ": data chunk before fmt chunk", pos);
      if (body + size > buf.size())
        throw FormatError(path.string() + ": data chunk truncated", body);
      Waveform w;
      w.sample_rate_hz = rate;
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        std::int16_t s;
        std::memcpy(&s, buf.data() + body + 2 * i, 2);
        w.samples[i] = static_cast<double>(s) / 32768.0;
      }
      if (w.samples.empty()) throw FormatError(path.string() + ": empty data chunk", body);
      return w;
    }
    pos = body + size + (size & 1u);
  }
  throw FormatError(path.string() + ": no data chunk", pos);
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  w.validate();
  if (w.sample_rate_hz != kRadarRateHz && w.sample_rate_hz != kSpeechRateHz)
    throw std::invalid_argument("wav writer accepts 5100 Hz or 8000 Hz only");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto rate = static_cast<std::uint32_t>(w.sample_rate_hz);
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  out.write("RIFF", 4);
  put_le<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint32_t>(out, rate);
  put_le<std::uint32_t>(out, rate * 2);
  put_le<std::uint16_t>(out, 2);
  put_le<std::uint16_t>(out, 16);
  out.write("data", 4);
  put_le<std::uint32_t>(out, data_bytes);
  for (double s : w.samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const auto code = static_cast<std::int16_t>(
        std::clamp(std::lround(clipped * 32768.0), -32768L, 32767L));
    put_le<std::int16_t>(out, code);
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_matrix_dump(const std::filesystem::path& path, const MatrixDump& dump) {
  if (dump.values.size() != static_cast<std::size_t>(dump.rows) * dump.cols)
    throw std::invalid_argument("matrix dump value count does not match rows x cols");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMelMagic.data(), kMelMagic.size());
  put_le(out, dump.rows);
  put_le(out, dump.cols);
  out.write(reinterpret_cast<const char*>(dump.values.data()),
            static_cast<std::streamsize>(dump.values.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

MatrixDump read_matrix_dump(const std::filesystem::path& path) {
  const std::vector<char> buf = slurp(path);
  if (buf.size() < kMelMagic.size())
    throw FormatError("matrix dump truncated in magic", buf.size());
  for (std::size_t i = 0; i < kMelMagic.size(); ++i)
    if (buf[i] != kMelMagic[i]) throw FormatError("bad matrix dump magic", i);
  MatrixDump dump;
  dump.rows = read_le<std::uint32_t>(buf, 7, "row count");
  dump.cols = read_le<std::uint32_t>(buf, 11, "column count");
  const std::size_t header = 15;
  const std::size_t count = static_cast<std::size_t>(dump.rows) * dump.cols;
  const std::size_t expected = header + count * sizeof(float);
  if (buf.size() < expected) throw FormatError("matrix dump truncated in data", buf.size());
  if (buf.size() > expected) throw FormatError("trailing bytes after matrix data", expected);
  dump.values.resize(count);
  std::memcpy(dump.values.data(), buf.data() + header, count * sizeof(float));
  for (std::size_t i = 0; i < count; ++i)
    if (!std::isfinite(dump.values[i]))
      throw FormatError("non-finite matrix entry", header + i * sizeof(float));
  return dump;
}

}  // namespace r2s::dsp
