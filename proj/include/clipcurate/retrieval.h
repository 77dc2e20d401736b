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

#ifndef CLIPCURATE_RETRIEVAL_H_
#define CLIPCURATE_RETRIEVAL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "clipcurate/clip_record.h"
#include "clipcurate/ontology.h"
#include "clipcurate/text_pipeline.h"

namespace clipcurate {

inline constexpr double kDefaultTau = 0.5;

// Query for one label: root query of the label name followed by the root
// queries of all its descendants.
struct Query {
  std::string label_id;
  Document words;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(const std::vector<std::string>& words);

  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  std::optional<std::size_t> IndexOf(const std::string& word) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct DocVector {
  std::vector<std::int32_t> counts;

  DocVector& operator+=(const DocVector& other);
  bool operator==(const DocVector&) const = default;
};

DocVector operator+(DocVector a, const DocVector& b);

struct ScoredClip {
  std::string clip_id;
  std::string label_id;
  double score = 0.0;
};

Query BuildQuery(const std::string& label_id, const Ontology& ontology,
                 const TextPipeline& pipeline);

// Query words concatenated in the given order, first occurrence kept.
// Throws std::invalid_argument for an empty query list.
Vocabulary BuildVocabulary(const std::vector<Query>& queries);

// 1 at every position whose vocabulary word occurs in the document.
DocVector Vectorise(const Document& words, const Vocabulary& vocab);

// (a . b) / (|a| |b|), or 0 when either vector is zero.
double CosineSimilarity(const DocVector& a, const DocVector& b);

double RelevanceScore(const Query& query, const Document& tags, const Document& description,
                      const Vocabulary& vocab);

// Scores clips against every label of a label set.
//
// Queries are built once, in canonical label order, and indexed by vocabulary
// position so that scoring a clip only touches the words it contains. The
// object is immutable after construction; scoring is safe from many threads.
class Labeler {
 public:
  Labeler(const Ontology& ontology, const LabelSet& labels, TextPipeline pipeline);

  const std::vector<Query>& queries() const { return queries_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const TextPipeline& pipeline() const { return pipeline_; }

  // One score per label, in canonical label order.
  std::vector<double> Scores(const Document& tags, const Document& description) const;
  std::vector<double> Scores(const ClipRecord& clip) const;

  // Highest-scoring label regardless of threshold. Ties go to the label that
  // comes first in canonical order.
  ScoredClip Best(const ClipRecord& clip) const;

  // Best(clip), or nullopt when its score is below tau.
  std::optional<ScoredClip> Assign(const ClipRecord& clip, double tau) const;

  // Assign over a batch using up to num_threads workers. Retained clips are
  // returned sorted by clip id, so the output does not depend on input order.
  std::vector<ScoredClip> AssignAll(const std::vector<ClipRecord>& clips, double tau,
                                    unsigned num_threads = 1) const;

 private:
  struct Overlap {
    std::vector<std::int64_t> dots;  // per query
    std::int64_t doc_norm2 = 0;
  };
  Overlap Overlaps(const Document& tags, const Document& description) const;

  TextPipeline pipeline_;
  std::vector<Query> queries_;
  Vocabulary vocab_;
  std::vector<std::int64_t> query_sizes_;
  // vocabulary index -> positions of the queries containing that word
  std::vector<std::vector<std::uint32_t>> postings_;
};

struct ClassAccuracy {
  std::size_t n_ground_truth = 0;
  std::size_t n_retrieved = 0;
  std::size_t n_correct = 0;
  std::optional<double> accuracy;  // unset when nothing was retrieved
};

struct EvaluationReport {
  double tau = kDefaultTau;
  std::size_t n_ground_truth = 0;
  std::size_t n_retrieved = 0;
  std::size_t n_correct = 0;
  double retrieval_rate = 0.0;
  double accuracy = 0.0;
  std::map<std::string, ClassAccuracy> per_class;
  double class_accuracy_threshold = 0.9;
  std::size_t n_classes_above = 0;
  std::size_t n_classes_below = 0;
  std::size_t n_classes_unretrieved = 0;
  std::optional<double> mean_accuracy_above;
  std::optional<double> mean_accuracy_below;

  std::string ToJson() const;
};

// Compares assigned labels with ground truth. A ground-truth clip counts as
// retrieved when it appears in assigned with score >= tau; assigned clips
// outside the ground truth are ignored. Classes are keyed by the true label.
// Throws std::invalid_argument for empty ground truth.
EvaluationReport EvaluateLabels(const std::vector<ScoredClip>& assigned,
                                const std::map<std::string, std::string>& ground_truth,
                                double tau, double class_accuracy_threshold = 0.9);

// clip_id,label_id,score with the score printed to 6 decimal places.
std::string ScoredCsv(const std::vector<ScoredClip>& scored);
std::vector<ScoredClip> ParseScoredCsv(std::string_view text);

}  // namespace clipcurate

#endif  // CLIPCURATE_RETRIEVAL_H_
