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

#ifndef CLIPCURATE_WAV_H_
#define CLIPCURATE_WAV_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace clipcurate {

// Target format of every curated clip.
struct AudioFormatRequirements {
  std::uint16_t channels = 1;
  std::uint32_t sample_rate = 44100;
  std::uint16_t bits_per_sample = 16;
  double min_duration = 0.3;
  double max_duration = 30.0;
  double duration_tolerance = 0.010;
};

struct FormatProblem {
  std::string field;  // container, format, channels, sample_rate, bits_per_sample, duration
  std::string message;
};

struct FormatReport {
  std::uint16_t format_tag = 0;  // 1 = PCM (also reported for PCM WAVE_FORMAT_EXTENSIBLE)
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
  std::uint64_t data_bytes = 0;
  double duration = 0.0;
  std::vector<FormatProblem> problems;

  bool ok() const { return problems.empty(); }
  bool HasProblem(std::string_view field) const;
  std::string Summary() const;
};

// Parses a RIFF/WAVE byte stream and checks it against the requirements.
FormatReport VerifyAudioBytes(std::string_view bytes, const AudioFormatRequirements& req = {});

// Throws std::runtime_error when the file cannot be read.
FormatReport VerifyAudioFormat(const std::filesystem::path& path,
                               const AudioFormatRequirements& req = {});

// Canonical 44-byte-header PCM WAV holding a low-amplitude 440 Hz tone.
std::string EncodePcmWav(std::uint16_t channels, std::uint32_t sample_rate,
                         std::uint16_t bits_per_sample, std::uint64_t frames);

}  // namespace clipcurate

#endif  // CLIPCURATE_WAV_H_
