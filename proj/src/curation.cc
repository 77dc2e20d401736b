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

#include "clipcurate/curation.h"

#include <algorithm>
#include <unordered_set>

#include "clipcurate/csv.h"
#include "clipcurate/rng.h"
#include "clipcurate/util.h"

namespace clipcurate {

namespace {

std::vector<std::string> SplitList(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string_view::npos) end = s.size();
    std::string_view item = s.substr(pos, end - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    pos = end + 1;
  }
  return out;
}

void ParseInto(std::string_view text, bool has_split, std::vector<GroundTruthEntry>& out) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return;
  CsvTable table(text);
  const std::size_t c_fname = table.column("fname");
  const std::size_t c_mids = table.column("mids");
  const std::size_t c_split = has_split ? table.column("split") : 0;
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto& row = table.rows()[r];
    GroundTruthEntry e;
    e.clip_id = row[c_fname];
    e.labels = SplitList(row[c_mids]);
    if (e.labels.empty()) throw CsvError("ground-truth row has no labels", r + 2);
    try {
      e.split = has_split ? ParseSplit(row[c_split]) : Split::kTest;
    } catch (const std::invalid_argument& err) {
      throw CsvError(err.what(), r + 2);
    }
    out.push_back(std::move(e));
  }
}

bool EntryLess(const GroundTruthEntry& a, const GroundTruthEntry& b) {
  if (a.split != b.split) return a.split < b.split;
  if (a.labels != b.labels) return a.labels < b.labels;
  return ClipIdLess(a.clip_id, b.clip_id);
}

}  // namespace

std::vector<GroundTruthEntry> ParseGroundTruth(std::string_view dev_csv,
                                               std::string_view eval_csv) {
  std::vector<GroundTruthEntry> out;
  ParseInto(dev_csv, true, out);
  ParseInto(eval_csv, false, out);
  return out;
}

std::vector<std::string> MostSpecificLabels(const std::vector<std::string>& labels,
                                            const Ontology& ontology) {
  std::vector<std::string> unique;
  for (const auto& l : labels) {
    if (std::find(unique.begin(), unique.end(), l) == unique.end()) unique.push_back(l);
  }
  std::vector<std::string> out;
  for (const auto& a : unique) {
    bool is_ancestor = std::any_of(unique.begin(), unique.end(), [&](const std::string& b) {
      return ontology.IsAncestor(a, b);
    });
    if (!is_ancestor) out.push_back(a);
  }
  return out;
}

ReductionResult ReduceToSingleLabel(const std::vector<GroundTruthEntry>& ground_truth,
                                    const Ontology& ontology, MinCounts min_counts) {
  for (const auto& e : ground_truth) {
    for (const auto& l : e.labels) {
      if (!ontology.contains(l)) {
        throw CurationError("clip '" + e.clip_id + "' references unknown label '" + l + "'");
      }
    }
  }

  ReductionResult result;
  std::vector<GroundTruthEntry> single;
  for (const auto& e : ground_truth) {
    auto specific = MostSpecificLabels(e.labels, ontology);
    if (specific.size() != 1) {
      ++result.n_multi_label;
      continue;
    }
    single.push_back({e.clip_id, {specific.front()}, e.split});
  }

  std::vector<std::string> candidates;
  for (const auto& e : single) candidates.push_back(e.labels.front());
  LabelSet all_classes(candidates);
  LabelSet classes = PruneAncestors(all_classes.labels(), ontology);
  for (const auto& c : all_classes.labels()) {
    if (!classes.contains(c)) result.pruned_ancestors.push_back(c);
  }

  const SplitCounts minimum{min_counts.train, min_counts.val, min_counts.test};
  std::set<std::string> alive(classes.labels().begin(), classes.labels().end());
  for (;;) {
    std::map<std::string, SplitCounts> counts;
    for (const auto& c : alive) counts[c] = {0, 0, 0};
    for (const auto& e : single) {
      if (alive.count(e.labels.front())) ++counts[e.labels.front()][static_cast<int>(e.split)];
    }
    std::vector<std::string> failing;
    for (const auto& [c, n] : counts) {
      for (std::size_t s = 0; s < 3; ++s) {
        if (n[s] < minimum[s]) {
          failing.push_back(c);
          break;
        }
      }
    }
    if (failing.empty()) break;
    for (const auto& c : failing) {
      alive.erase(c);
      result.below_minimum.push_back(c);
    }
  }
  std::sort(result.below_minimum.begin(), result.below_minimum.end());

  result.labels = LabelSet(std::vector<std::string>(alive.begin(), alive.end()));
  for (auto& e : single) {
    if (alive.count(e.labels.front())) result.entries.push_back(std::move(e));
  }
  std::sort(result.entries.begin(), result.entries.end(), EntryLess);
  return result;
}

DatasetManifest CleanManifest(const ReductionResult& reduction, const Ontology& ontology,
                              std::string name, std::string source) {
  DatasetManifest m;
  m.name = std::move(name);
  m.provenance.source = std::move(source);
  m.provenance.tool_version = std::string(kToolVersion);
  for (const auto& e : reduction.entries) {
    const std::string& label = e.labels.front();
    m.entries.push_back({e.clip_id, label, ontology.node(label).name, e.split});
  }
  m.SortCanonical();
  m.Validate(&reduction.labels);
  return m;
}

CurationResult CurateNoisy(const std::vector<ScoredClip>& scored,
                           const std::set<std::string>& exclusion,
                           const std::map<std::string, std::size_t>& clean_counts,
                           std::uint64_t seed, double tau, const Ontology& ontology,
                           std::string name, std::string source) {
  CurationResult result;
  result.n_scored = scored.size();
  std::map<std::string, std::vector<std::string>> by_class;
  std::unordered_set<std::string> seen;
  for (const auto& s : scored) {
    if (!seen.insert(s.clip_id).second) {
      throw CurationError("clip '" + s.clip_id + "' is scored more than once");
    }
    if (s.score < tau) {
      ++result.n_below_tau;
      continue;
    }
    if (exclusion.count(s.clip_id)) {
      ++result.n_excluded;
      continue;
    }
    if (!clean_counts.count(s.label_id)) continue;
    by_class[s.label_id].push_back(s.clip_id);
    ++result.n_candidates;
  }
  if (result.n_candidates == 0) throw CurationError("no candidate clips left to curate");

  SeededRng rng(seed);
  DatasetManifest& m = result.manifest;
  m.name = std::move(name);
  m.provenance.seed = seed;
  m.provenance.tau = tau;
  m.provenance.source = std::move(source);
  m.provenance.tool_version = std::string(kToolVersion);
  for (const auto& [label, needed] : clean_counts) {
    auto it = by_class.find(label);
    std::vector<std::string> pool = it == by_class.end() ? std::vector<std::string>{}
                                                         : std::move(it->second);
    if (pool.size() < needed || needed == 0) {
      result.dropped_classes.push_back(label);
      continue;
    }
    std::sort(pool.begin(), pool.end(), ClipIdOrder{});
    const std::string& label_name = ontology.node(label).name;
    for (std::size_t i : rng.SampleWithoutReplacement(pool.size(), needed)) {
      m.entries.push_back({pool[i], label, label_name, Split::kTrain});
    }
  }
  m.provenance.dropped_classes = result.dropped_classes;
  m.SortCanonical();
  m.Validate();
  return result;
}

std::pair<DatasetManifest, DatasetManifest> PairManifests(
    DatasetManifest clean, DatasetManifest noisy, const std::vector<std::string>& dropped) {
  std::set<std::string> drop(dropped.begin(), dropped.end());
  auto keep = [&](std::vector<ManifestEntry>& entries, bool train_only) {
    std::erase_if(entries, [&](const ManifestEntry& e) {
      return drop.count(e.label_id) > 0 || (train_only && e.split != Split::kTrain);
    });
  };
  keep(clean.entries, false);
  keep(noisy.entries, true);

  auto clean_counts = clean.CountsFor(Split::kTrain);
  auto noisy_counts = noisy.CountsFor(Split::kTrain);
  std::set<std::string> classes;
  for (const auto& [c, n] : clean_counts) classes.insert(c);
  for (const auto& [c, n] : noisy_counts) classes.insert(c);
  for (const auto& c : classes) {
    std::size_t a = clean_counts.count(c) ? clean_counts[c] : 0;
    std::size_t b = noisy_counts.count(c) ? noisy_counts[c] : 0;
    if (a != b) {
      throw PairingError(c, "class '" + c + "' has " + std::to_string(a) +
                                " clean and " + std::to_string(b) + " noisy training clips");
    }
  }

  auto merge_dropped = [&](Provenance& p) {
    std::set<std::string> all(p.dropped_classes.begin(), p.dropped_classes.end());
    all.insert(drop.begin(), drop.end());
    p.dropped_classes.assign(all.begin(), all.end());
  };
  merge_dropped(clean.provenance);
  merge_dropped(noisy.provenance);
  clean.provenance.paired_with = noisy.name;
  noisy.provenance.paired_with = clean.name;
  noisy.provenance.eval_splits_from = clean.name;
  return {std::move(clean), std::move(noisy)};
}

}  // namespace clipcurate
