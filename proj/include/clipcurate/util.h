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

#ifndef CLIPCURATE_UTIL_H_
#define CLIPCURATE_UTIL_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace clipcurate {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Orders clip ids numerically when both are decimal integers, otherwise
// lexicographically. Freesound ids are integers, so "99" sorts before "100".
bool ClipIdLess(std::string_view a, std::string_view b);

struct ClipIdOrder {
  bool operator()(std::string_view a, std::string_view b) const {
    return ClipIdLess(a, b);
  }
};

std::string ReadFile(const std::filesystem::path& path);

// Writes through a temporary sibling and renames it into place.
void WriteFile(const std::filesystem::path& path, std::string_view content);

std::string Sha256Hex(std::string_view bytes);
std::string Sha256FileHex(const std::filesystem::path& path);

// Fixed-point decimal formatting independent of the global locale.
std::string FormatFixed(double value, int decimals);

// Warnings go to stderr unless CLIPCURATE_QUIET is set in the environment.
void LogWarning(std::string_view message);

}  // namespace clipcurate

#endif  // CLIPCURATE_UTIL_H_
