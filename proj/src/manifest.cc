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

#include "clipcurate/manifest.h"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "clipcurate/csv.h"
#include "clipcurate/util.h"
#include "json.hpp"

namespace clipcurate {

using json = nlohmann::json;

namespace {

json OptionalJson(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> OptionalDouble(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

std::string StringOr(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  return it->get<std::string>();
}

}  // namespace

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("invalid split '" + std::string(name) + "'");
}

bool CanonicalEntryLess(const ManifestEntry& a, const ManifestEntry& b) {
  if (a.split != b.split) return a.split < b.split;
  if (a.label_id != b.label_id) return a.label_id < b.label_id;
  return ClipIdLess(a.clip_id, b.clip_id);
}

std::map<std::string, SplitCounts> DatasetManifest::Counts() const {
  std::map<std::string, SplitCounts> counts;
  for (const auto& e : entries) ++counts[e.label_id][static_cast<std::size_t>(e.split)];
  return counts;
}

std::map<std::string, std::size_t> DatasetManifest::CountsFor(Split split) const {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : entries) {
    if (e.split == split) ++counts[e.label_id];
  }
  return counts;
}

std::vector<std::string> DatasetManifest::LabelIds() const {
  std::set<std::string> ids;
  for (const auto& e : entries) ids.insert(e.label_id);
  return {ids.begin(), ids.end()};
}

std::map<std::string, std::string> DatasetManifest::LabelNames() const {
  std::map<std::string, std::string> names;
  for (const auto& e : entries) names.emplace(e.label_id, e.label_name);
  return names;
}

void DatasetManifest::Validate(const LabelSet* labels) const {
  std::unordered_set<std::string> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.clip_id).second) {
      throw ManifestError("manifest '" + name + "': duplicate clip id '" + e.clip_id + "'");
    }
    if (labels && !labels->contains(e.label_id)) {
      throw ManifestError("manifest '" + name + "': label '" + e.label_id +
                          "' is not in the label set");
    }
  }
}

void DatasetManifest::SortCanonical() {
  std::stable_sort(entries.begin(), entries.end(), CanonicalEntryLess);
}

std::string ManifestCsv(const DatasetManifest& manifest) {
  std::string out = "clip_id,label_id,label_name,split\n";
  for (const auto& e : manifest.entries) {
    out += CsvLine({e.clip_id, e.label_id, e.label_name, std::string(SplitName(e.split))});
  }
  return out;
}

std::string ManifestSidecarJson(const DatasetManifest& manifest) {
  const Provenance& p = manifest.provenance;
  json j;
  j["name"] = manifest.name;
  j["seed"] = p.seed ? json(*p.seed) : json(nullptr);
  j["tau"] = OptionalJson(p.tau);
  j["source"] = p.source;
  j["tool_version"] = p.tool_version;
  j["dropped_classes"] = p.dropped_classes;
  j["paired_with"] = p.paired_with;
  j["eval_splits_from"] = p.eval_splits_from;
  json counts = json::object();
  for (const auto& [label, c] : manifest.Counts()) {
    counts[label] = {{"train", c[0]}, {"val", c[1]}, {"test", c[2]}};
  }
  j["counts"] = counts;
  j["n_entries"] = manifest.entries.size();
  if (p.noise) {
    const NoiseProvenance& n = *p.noise;
    j["noise"] = {{"kind", n.kind},
                  {"rho", n.rho},
                  {"p_geometric", OptionalJson(n.p_geometric)},
                  {"seed", n.seed},
                  {"n_train", n.n_train},
                  {"n_changed", n.n_changed},
                  {"reference_noise_rate", OptionalJson(n.reference_noise_rate)},
                  {"effective_noise_rate", OptionalJson(n.effective_noise_rate)},
                  {"base_manifest", n.base_manifest},
                  {"noisy_manifest", n.noisy_manifest}};
  } else {
    j["noise"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::filesystem::path SidecarPath(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

void EmitManifest(const DatasetManifest& manifest, const std::filesystem::path& csv_path) {
  manifest.Validate();
  WriteFile(csv_path, ManifestCsv(manifest));
  WriteFile(SidecarPath(csv_path), ManifestSidecarJson(manifest));
}

DatasetManifest ParseManifest(std::string_view csv_text, std::string_view sidecar_json) {
  DatasetManifest m;
  json j;
  try {
    j = json::parse(sidecar_json);
    m.name = j.at("name").get<std::string>();
    Provenance& p = m.provenance;
    if (!j.at("seed").is_null()) p.seed = j["seed"].get<std::uint64_t>();
    p.tau = OptionalDouble(j, "tau");
    p.source = StringOr(j, "source");
    p.tool_version = StringOr(j, "tool_version");
    p.dropped_classes = j.value("dropped_classes", std::vector<std::string>{});
    p.paired_with = StringOr(j, "paired_with");
    p.eval_splits_from = StringOr(j, "eval_splits_from");
    if (auto it = j.find("noise"); it != j.end() && !it->is_null()) {
      NoiseProvenance n;
      n.kind = it->at("kind").get<std::string>();
      n.rho = it->at("rho").get<double>();
      n.p_geometric = OptionalDouble(*it, "p_geometric");
      n.seed = it->at("seed").get<std::uint64_t>();
      n.n_train = it->at("n_train").get<std::size_t>();
      n.n_changed = it->at("n_changed").get<std::size_t>();
      n.reference_noise_rate = OptionalDouble(*it, "reference_noise_rate");
      n.effective_noise_rate = OptionalDouble(*it, "effective_noise_rate");
      n.base_manifest = StringOr(*it, "base_manifest");
      n.noisy_manifest = StringOr(*it, "noisy_manifest");
      p.noise = n;
    }
  } catch (const json::exception& e) {
    throw ManifestError(std::string("invalid manifest sidecar: ") + e.what());
  }

  CsvTable table(csv_text);
  const std::size_t c_clip = table.column("clip_id");
  const std::size_t c_label = table.column("label_id");
  const std::size_t c_name = table.column("label_name");
  const std::size_t c_split = table.column("split");
  for (const auto& row : table.rows()) {
    m.entries.push_back({row[c_clip], row[c_label], row[c_name], ParseSplit(row[c_split])});
  }
  if (auto n = j.find("n_entries"); n != j.end() && n->get<std::size_t>() != m.entries.size()) {
    throw ManifestError("manifest '" + m.name + "': sidecar lists " +
                        std::to_string(n->get<std::size_t>()) + " entries, CSV has " +
                        std::to_string(m.entries.size()));
  }
  m.Validate();
  return m;
}

DatasetManifest ReadManifest(const std::filesystem::path& csv_path) {
  const auto sidecar = SidecarPath(csv_path);
  if (!std::filesystem::exists(sidecar)) {
    const json bare = {{"name", csv_path.stem().string()}, {"seed", nullptr}};
    return ParseManifest(ReadFile(csv_path), bare.dump());
  }
  return ParseManifest(ReadFile(csv_path), ReadFile(sidecar));
}

}  // namespace clipcurate
