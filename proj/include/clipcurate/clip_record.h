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

#ifndef CLIPCURATE_CLIP_RECORD_H_
#define CLIPCURATE_CLIP_RECORD_H_

#include <string>
#include <string_view>
#include <vector>

namespace clipcurate {

// Metadata of one clip on the sound-sharing platform.
struct ClipRecord {
  std::string clip_id;
  std::vector<std::string> tags;
  std::string description;
  double duration = 0.0;  // seconds
  std::string license;
  std::string download_url;

  bool operator==(const ClipRecord&) const = default;
};

// One compact JSON object per line, keys sorted:
// {"description":..,"download_url":..,"duration":..,"id":"..","license":..,"tags":[..]}
std::string ClipRecordToJsonLine(const ClipRecord& record);

// Accepts integer or string ids. Throws std::invalid_argument when a required
// field (id, duration) is missing or has the wrong type.
ClipRecord ClipRecordFromJson(std::string_view json_text);

}  // namespace clipcurate

#endif  // CLIPCURATE_CLIP_RECORD_H_
