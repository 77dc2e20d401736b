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

#ifndef CLIPCURATE_MANIFEST_H_
#define CLIPCURATE_MANIFEST_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "clipcurate/ontology.h"

namespace clipcurate {

enum class Split { kTrain = 0, kVal = 1, kTest = 2 };

std::string_view SplitName(Split split);
// Accepts "train", "val" and "test"; throws std::invalid_argument otherwise.
Split ParseSplit(std::string_view name);

struct ManifestEntry {
  std::string clip_id;
  std::string label_id;
  std::string label_name;
  Split split = Split::kTrain;

  bool operator==(const ManifestEntry&) const = default;
};

// Canonical entry order: split, then label id, then clip id.
bool CanonicalEntryLess(const ManifestEntry& a, const ManifestEntry& b);

struct NoiseProvenance {
  std::string kind;  // uniform | conditional | substitution
  double rho = 0.0;
  std::optional<double> p_geometric;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_changed = 0;
  std::optional<double> reference_noise_rate;
  std::optional<double> effective_noise_rate;
  std::string base_manifest;
  std::string noisy_manifest;

  bool operator==(const NoiseProvenance&) const = default;
};

struct Provenance {
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  std::string source;
  std::string tool_version;
  std::vector<std::string> dropped_classes;
  std::string paired_with;
  // Set on a manifest whose validation and test splits live in another one.
  std::string eval_splits_from;
  std::optional<NoiseProvenance> noise;

  bool operator==(const Provenance&) const = default;
};

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SplitCounts = std::array<std::size_t, 3>;

struct DatasetManifest {
  std::string name;
  std::vector<ManifestEntry> entries;
  Provenance provenance;

  // label -> (train, val, test) counts
  std::map<std::string, SplitCounts> Counts() const;
  std::map<std::string, std::size_t> CountsFor(Split split) const;
  std::vector<std::string> LabelIds() const;
  // label id -> label name as recorded in the entries
  std::map<std::string, std::string> LabelNames() const;

  // Throws ManifestError on a duplicate clip id, or a label outside labels
  // when labels is non-null.
  void Validate(const LabelSet* labels = nullptr) const;

  void SortCanonical();

  bool operator==(const DatasetManifest&) const = default;
};

std::string ManifestCsv(const DatasetManifest& manifest);
std::string ManifestSidecarJson(const DatasetManifest& manifest);

// Sidecar path for a manifest CSV: same stem, ".json" extension.
std::filesystem::path SidecarPath(const std::filesystem::path& csv_path);

// Writes <csv_path> and its sidecar. Output is a pure function of the manifest.
void EmitManifest(const DatasetManifest& manifest, const std::filesystem::path& csv_path);

DatasetManifest ParseManifest(std::string_view csv_text, std::string_view sidecar_json);
// Without a sidecar the manifest is named after the file stem and carries no
// provenance.
DatasetManifest ReadManifest(const std::filesystem::path& csv_path);

}  // namespace clipcurate

#endif  // CLIPCURATE_MANIFEST_H_
