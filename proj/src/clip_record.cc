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

#include "clipcurate/clip_record.h"

#include <stdexcept>

#include "json.hpp"

namespace clipcurate {

using json = nlohmann::json;

std::string ClipRecordToJsonLine(const ClipRecord& record) {
  json j;
  j["id"] = record.clip_id;
  j["tags"] = record.tags;
  j["description"] = record.description;
  j["duration"] = record.duration;
  j["license"] = record.license;
  j["download_url"] = record.download_url;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

ClipRecord ClipRecordFromJson(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("clip record is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("clip record is not a JSON object");
  ClipRecord r;
  auto id = j.find("id");
  if (id == j.end()) throw std::invalid_argument("clip record has no 'id'");
  if (id->is_string()) {
    r.clip_id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    r.clip_id = std::to_string(id->get<long long>());
  } else {
    throw std::invalid_argument("clip record 'id' must be a string or integer");
  }
  if (r.clip_id.empty()) throw std::invalid_argument("clip record has an empty 'id'");
  auto duration = j.find("duration");
  if (duration == j.end() || !duration->is_number()) {
    throw std::invalid_argument("clip record " + r.clip_id + " has no numeric 'duration'");
  }
  r.duration = duration->get<double>();
  if (auto tags = j.find("tags"); tags != j.end() && tags->is_array()) {
    for (const auto& t : *tags) {
      if (t.is_string()) r.tags.push_back(t.get<std::string>());
    }
  }
  if (auto d = j.find("description"); d != j.end() && d->is_string()) {
    r.description = d->get<std::string>();
  }
  if (auto l = j.find("license"); l != j.end() && l->is_string()) r.license = l->get<std::string>();
  if (auto u = j.find("download_url"); u != j.end() && u->is_string()) {
    r.download_url = u->get<std::string>();
  }
  return r;
}

}  // namespace clipcurate
