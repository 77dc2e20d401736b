// Copyright 2026 The clipcurate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "clipcurate/wav.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "clipcurate/util.h"

namespace clipcurate {

namespace {

std::uint32_t ReadU32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t ReadU16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

bool FormatReport::HasProblem(std::string_view field) const {
  for (const auto& p : problems) {
    if (p.field == field) return true;
  }
  return false;
}

std::string FormatReport::Summary() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (i) os << "; ";
    os << problems[i].field << ": " << problems[i].message;
  }
  return os.str();
}

FormatReport VerifyAudioBytes(std::string_view bytes, const AudioFormatRequirements& req) {
  FormatReport report;
  auto fail = [&](std::string field, std::string message) {
    report.problems.push_back({std::move(field), std::move(message)});
  };
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
    fail("container", "not a RIFF/WAVE file");
    return report;
  }

  bool have_fmt = false, have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::string_view id = bytes.substr(pos, 4);
    std::uint64_t size = ReadU32(bytes, pos + 4);
    std::size_t body = pos + 8;
    std::uint64_t available = bytes.size() - body;
    if (id == "fmt ") {
      if (size < 16 || available < 16) {
        fail("container", "fmt chunk is truncated");
        return report;
      }
      report.format_tag = ReadU16(bytes, body);
      report.channels = ReadU16(bytes, body + 2);
      report.sample_rate = ReadU32(bytes, body + 4);
      report.bits_per_sample = ReadU16(bytes, body + 14);
      if (report.format_tag == kFormatExtensible && size >= 40 && available >= 40) {
        // The first two bytes of the sub-format GUID carry the real format tag.
        report.format_tag = ReadU16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      report.data_bytes = std::min(size, available);
      have_data = true;
      if (have_fmt) break;
    }
    pos = body + static_cast<std::size_t>(std::min(size + (size & 1), available));
  }
  if (!have_fmt) {
    fail("container", "missing fmt chunk");
    return report;
  }
  if (!have_data) {
    fail("container", "missing data chunk");
    return report;
  }

  if (report.format_tag != kFormatPcm) {
    fail("format", "expected PCM (1), got " + std::to_string(report.format_tag));
  }
  if (report.channels != req.channels) {
    fail("channels", "expected " + std::to_string(req.channels) + " channel(s), got " +
                         std::to_string(report.channels));
  }
  if (report.sample_rate != req.sample_rate) {
    fail("sample_rate", "expected " + std::to_string(req.sample_rate) + " Hz, got " +
                            std::to_string(report.sample_rate));
  }
  if (report.bits_per_sample != req.bits_per_sample) {
    fail("bits_per_sample", "expected " + std::to_string(req.bits_per_sample) + " bits, got " +
                                std::to_string(report.bits_per_sample));
  }
  const std::uint64_t frame_bytes =
      static_cast<std::uint64_t>(report.channels) * ((report.bits_per_sample + 7u) / 8u);
  if (frame_bytes == 0 || report.sample_rate == 0) {
    fail("duration", "cannot compute duration from the fmt chunk");
    return report;
  }
  report.duration = static_cast<double>(report.data_bytes / frame_bytes) /
                    static_cast<double>(report.sample_rate);
  if (report.duration < req.min_duration - req.duration_tolerance ||
      report.duration > req.max_duration + req.duration_tolerance) {
    fail("duration", FormatFixed(report.duration, 3) + " s is outside [" +
                         FormatFixed(req.min_duration, 1) + ", " +
                         FormatFixed(req.max_duration, 1) + "] s");
  }
  return report;
}

FormatReport VerifyAudioFormat(const std::filesystem::path& path,
                               const AudioFormatRequirements& req) {
  return VerifyAudioBytes(ReadFile(path), req);
}

std::string EncodePcmWav(std::uint16_t channels, std::uint32_t sample_rate,
                         std::uint16_t bits_per_sample, std::uint64_t frames) {
  if (bits_per_sample != 8 && bits_per_sample != 16 && bits_per_sample != 24 &&
      bits_per_sample != 32) {
    throw std::invalid_argument("unsupported bit depth");
  }
  const std::uint16_t sample_bytes = bits_per_sample / 8;
  const std::uint64_t data_bytes = frames * channels * sample_bytes;
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, static_cast<std::uint32_t>(36 + data_bytes));
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, kFormatPcm);
  PutU16(out, channels);
  PutU32(out, sample_rate);
  PutU32(out, sample_rate * channels * sample_bytes);
  PutU16(out, static_cast<std::uint16_t>(channels * sample_bytes));
  PutU16(out, bits_per_sample);
  out += "data";
  PutU32(out, static_cast<std::uint32_t>(data_bytes));
  const double full_scale = std::ldexp(1.0, bits_per_sample - 1) - 1.0;
  for (std::uint64_t f = 0; f < frames; ++f) {
    double v = 0.1 * std::sin(2.0 * std::numbers::pi * 440.0 * static_cast<double>(f) /
                              static_cast<double>(sample_rate));
    auto s = static_cast<std::int64_t>(std::lround(v * full_scale));
    if (bits_per_sample == 8) s += 128;  // 8-bit PCM is unsigned
    for (std::uint16_t c = 0; c < channels; ++c) {
      for (std::uint16_t b = 0; b < sample_bytes; ++b) {
        out.push_back(static_cast<char>((static_cast<std::uint64_t>(s) >> (8 * b)) & 0xFF));
      }
    }
  }
  return out;
}

}  // namespace clipcurate
