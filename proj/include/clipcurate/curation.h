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

#ifndef CLIPCURATE_CURATION_H_
#define CLIPCURATE_CURATION_H_

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clipcurate/manifest.h"
#include "clipcurate/ontology.h"
#include "clipcurate/retrieval.h"

namespace clipcurate {

class CurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pairing failed for a class; class_id() names it.
class PairingError : public CurationError {
 public:
  PairingError(std::string class_id, const std::string& what)
      : CurationError(what), class_id_(std::move(class_id)) {}
  const std::string& class_id() const { return class_id_; }

 private:
  std::string class_id_;
};

struct GroundTruthEntry {
  std::string clip_id;
  std::vector<std::string> labels;
  Split split = Split::kTrain;

  bool operator==(const GroundTruthEntry&) const = default;
};

// FSD50K-style ground truth. The development file has columns
// fname,labels,mids,split (split is train or val); the evaluation file has
// fname,labels,mids and becomes the test split. Ontology ids are taken from the
// comma-separated mids column. Either text may be empty.
std::vector<GroundTruthEntry> ParseGroundTruth(std::string_view dev_csv,
                                               std::string_view eval_csv);

struct MinCounts {
  std::size_t train = 50;
  std::size_t val = 10;
  std::size_t test = 20;
};

struct ReductionResult {
  LabelSet labels;
  // Surviving entries, one label each, in canonical order.
  std::vector<GroundTruthEntry> entries;
  std::size_t n_multi_label = 0;
  std::vector<std::string> pruned_ancestors;
  std::vector<std::string> below_minimum;
};

// Labels of an entry that are not ancestors of another label of the same
// entry. Ground truth with labels propagated up the ontology reduces to the
// sound types actually present.
std::vector<std::string> MostSpecificLabels(const std::vector<std::string>& labels,
                                            const Ontology& ontology);

// Single-label reduction of a multi-label ground truth:
//   1. drop entries with more than one most-specific label;
//   2. drop classes that are ancestors of other surviving classes;
//   3. drop classes below any per-split minimum, repeated until stable.
// Throws CurationError when an entry references an id missing from the ontology.
ReductionResult ReduceToSingleLabel(const std::vector<GroundTruthEntry>& ground_truth,
                                    const Ontology& ontology, MinCounts min_counts = {});

DatasetManifest CleanManifest(const ReductionResult& reduction, const Ontology& ontology,
                              std::string name, std::string source);

struct CurationResult {
  DatasetManifest manifest;
  std::vector<std::string> dropped_classes;
  std::size_t n_scored = 0;
  std::size_t n_below_tau = 0;
  std::size_t n_excluded = 0;
  // Candidates left after the threshold and exclusion filters.
  std::size_t n_candidates = 0;
};

// Builds the noisy training manifest. Clips below tau, clips in the exclusion
// set and clips labelled outside clean_counts are removed; then, class by
// class in canonical order, exactly clean_counts[c] clips are sampled without
// replacement from the candidates (sorted by clip id) with one generator
// seeded by seed. Classes with too few candidates are dropped and reported.
// Throws CurationError when no candidate remains.
CurationResult CurateNoisy(const std::vector<ScoredClip>& scored,
                           const std::set<std::string>& exclusion,
                           const std::map<std::string, std::size_t>& clean_counts,
                           std::uint64_t seed, double tau, const Ontology& ontology,
                           std::string name, std::string source);

// Removes the dropped classes from both manifests, checks that per-class
// training counts agree and links the two through their provenance. The noisy
// manifest keeps only its training split; evaluation splits come from clean.
// Throws PairingError naming the first mismatched class.
std::pair<DatasetManifest, DatasetManifest> PairManifests(DatasetManifest clean,
                                                          DatasetManifest noisy,
                                                          const std::vector<std::string>& dropped);

}  // namespace clipcurate

#endif  // CLIPCURATE_CURATION_H_
