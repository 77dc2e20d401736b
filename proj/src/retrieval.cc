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

#include "clipcurate/retrieval.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "clipcurate/csv.h"
#include "clipcurate/util.h"
#include "json.hpp"

namespace clipcurate {

namespace {

void AppendUnique(std::vector<std::string>& out, std::unordered_set<std::string>& seen,
                  const std::vector<std::string>& words) {
  for (const auto& w : words) {
    if (seen.insert(w).second) out.push_back(w);
  }
}

// Integer inner products are exact, and sqrt of an exact product keeps
// parallel vectors at exactly 1.
double Cosine(std::int64_t dot, std::int64_t norm2_a, std::int64_t norm2_b) {
  if (norm2_a == 0 || norm2_b == 0) return 0.0;
  double score = static_cast<double>(dot) /
                 std::sqrt(static_cast<double>(norm2_a) * static_cast<double>(norm2_b));
  return std::clamp(score, 0.0, 1.0);
}

}  // namespace

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    if (index_.emplace(w, words_.size()).second) words_.push_back(w);
  }
}

std::optional<std::size_t> Vocabulary::IndexOf(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

DocVector& DocVector::operator+=(const DocVector& other) {
  if (counts.size() != other.counts.size()) {
    throw std::invalid_argument("DocVector size mismatch");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

DocVector operator+(DocVector a, const DocVector& b) {
  a += b;
  return a;
}

Query BuildQuery(const std::string& label_id, const Ontology& ontology,
                 const TextPipeline& pipeline) {
  Query q;
  q.label_id = label_id;
  q.words.origin = DocumentOrigin::kLabel;
  std::unordered_set<std::string> seen;
  AppendUnique(q.words.words, seen, pipeline.Label(ontology.node(label_id).name).words);
  for (const auto& id : ontology.Descendants(label_id)) {
    AppendUnique(q.words.words, seen, pipeline.Label(ontology.node(id).name).words);
  }
  return q;
}

Vocabulary BuildVocabulary(const std::vector<Query>& queries) {
  if (queries.empty()) throw std::invalid_argument("cannot build a vocabulary from no queries");
  std::vector<std::string> all;
  for (const auto& q : queries) all.insert(all.end(), q.words.words.begin(), q.words.words.end());
  return Vocabulary(all);
}

DocVector Vectorise(const Document& words, const Vocabulary& vocab) {
  DocVector v;
  v.counts.assign(vocab.size(), 0);
  for (const auto& w : words.words) {
    if (auto i = vocab.IndexOf(w)) v.counts[*i] = 1;
  }
  return v;
}

double CosineSimilarity(const DocVector& a, const DocVector& b) {
  if (a.counts.size() != b.counts.size()) throw std::invalid_argument("DocVector size mismatch");
  std::int64_t dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    dot += static_cast<std::int64_t>(a.counts[i]) * b.counts[i];
    na += static_cast<std::int64_t>(a.counts[i]) * a.counts[i];
    nb += static_cast<std::int64_t>(b.counts[i]) * b.counts[i];
  }
  return Cosine(dot, na, nb);
}

double RelevanceScore(const Query& query, const Document& tags, const Document& description,
                      const Vocabulary& vocab) {
  return CosineSimilarity(Vectorise(query.words, vocab),
                          Vectorise(tags, vocab) + Vectorise(description, vocab));
}

Labeler::Labeler(const Ontology& ontology, const LabelSet& labels, TextPipeline pipeline)
    : pipeline_(std::move(pipeline)) {
  if (labels.empty()) throw std::invalid_argument("label set is empty");
  for (const auto& id : labels.labels()) queries_.push_back(BuildQuery(id, ontology, pipeline_));
  vocab_ = BuildVocabulary(queries_);
  postings_.resize(vocab_.size());
  for (std::uint32_t q = 0; q < queries_.size(); ++q) {
    query_sizes_.push_back(static_cast<std::int64_t>(queries_[q].words.words.size()));
    for (const auto& w : queries_[q].words.words) postings_[*vocab_.IndexOf(w)].push_back(q);
  }
}

Labeler::Overlap Labeler::Overlaps(const Document& tags, const Document& description) const {
  // Sparse sum of the two binary document vectors.
  std::vector<std::pair<std::size_t, std::int64_t>> support;
  auto add = [&](const Document& doc) {
    for (const auto& w : doc.words) {
      auto i = vocab_.IndexOf(w);
      if (!i) continue;
      auto it = std::find_if(support.begin(), support.end(),
                             [&](const auto& e) { return e.first == *i; });
      if (it == support.end()) {
        support.emplace_back(*i, 1);
      } else {
        ++it->second;
      }
    }
  };
  add(tags);
  add(description);

  Overlap o;
  o.dots.assign(queries_.size(), 0);
  for (const auto& [index, count] : support) {
    o.doc_norm2 += count * count;
    for (std::uint32_t q : postings_[index]) o.dots[q] += count;
  }
  return o;
}

std::vector<double> Labeler::Scores(const Document& tags, const Document& description) const {
  Overlap o = Overlaps(tags, description);
  std::vector<double> scores(queries_.size());
  for (std::size_t q = 0; q < queries_.size(); ++q) {
    scores[q] = Cosine(o.dots[q], query_sizes_[q], o.doc_norm2);
  }
  return scores;
}

std::vector<double> Labeler::Scores(const ClipRecord& clip) const {
  return Scores(pipeline_.Tags(clip.tags), pipeline_.Description(clip.description));
}

ScoredClip Labeler::Best(const ClipRecord& clip) const {
  Overlap o = Overlaps(pipeline_.Tags(clip.tags), pipeline_.Description(clip.description));
  // The document norm is shared, so score order is the order of dot^2 / |q|^2,
  // compared exactly by cross-multiplication. Empty queries score 0.
  auto num = [&](std::size_t q) { return query_sizes_[q] ? o.dots[q] * o.dots[q] : 0; };
  auto den = [&](std::size_t q) { return query_sizes_[q] ? query_sizes_[q] : 1; };
  std::size_t best = 0;
  for (std::size_t q = 1; q < queries_.size(); ++q) {
    if (num(q) * den(best) > num(best) * den(q)) best = q;
  }
  return ScoredClip{clip.clip_id, queries_[best].label_id,
                    Cosine(o.dots[best], query_sizes_[best], o.doc_norm2)};
}

std::optional<ScoredClip> Labeler::Assign(const ClipRecord& clip, double tau) const {
  ScoredClip best = Best(clip);
  if (best.score < tau) return std::nullopt;
  return best;
}

std::vector<ScoredClip> Labeler::AssignAll(const std::vector<ClipRecord>& clips, double tau,
                                           unsigned num_threads) const {
  std::vector<std::optional<ScoredClip>> slots(clips.size());
  num_threads = std::max(1u, std::min<unsigned>(num_threads, static_cast<unsigned>(clips.size())));
  if (num_threads <= 1) {
    for (std::size_t i = 0; i < clips.size(); ++i) slots[i] = Assign(clips[i], tau);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < num_threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t i = t; i < clips.size(); i += num_threads) {
          slots[i] = Assign(clips[i], tau);
        }
      });
    }
  }
  std::vector<ScoredClip> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  std::sort(out.begin(), out.end(), [](const ScoredClip& a, const ScoredClip& b) {
    return ClipIdLess(a.clip_id, b.clip_id);
  });
  return out;
}

EvaluationReport EvaluateLabels(const std::vector<ScoredClip>& assigned,
                                const std::map<std::string, std::string>& ground_truth,
                                double tau, double class_accuracy_threshold) {
  if (ground_truth.empty()) throw std::invalid_argument("ground truth is empty");
  EvaluationReport report;
  report.tau = tau;
  report.class_accuracy_threshold = class_accuracy_threshold;
  report.n_ground_truth = ground_truth.size();

  std::unordered_map<std::string, const ScoredClip*> by_clip;
  for (const auto& s : assigned) {
    if (s.score >= tau) by_clip[s.clip_id] = &s;
  }
  for (const auto& [clip, truth] : ground_truth) {
    ClassAccuracy& cls = report.per_class[truth];
    ++cls.n_ground_truth;
    auto it = by_clip.find(clip);
    if (it == by_clip.end()) continue;
    ++cls.n_retrieved;
    ++report.n_retrieved;
    if (it->second->label_id == truth) {
      ++cls.n_correct;
      ++report.n_correct;
    }
  }
  report.retrieval_rate =
      static_cast<double>(report.n_retrieved) / static_cast<double>(report.n_ground_truth);
  report.accuracy = report.n_retrieved == 0 ? 0.0
                                            : static_cast<double>(report.n_correct) /
                                                  static_cast<double>(report.n_retrieved);
  double sum_above = 0.0, sum_below = 0.0;
  for (auto& [label, cls] : report.per_class) {
    if (cls.n_retrieved == 0) {
      ++report.n_classes_unretrieved;
      continue;
    }
    double acc = static_cast<double>(cls.n_correct) / static_cast<double>(cls.n_retrieved);
    cls.accuracy = acc;
    if (acc > class_accuracy_threshold) {
      ++report.n_classes_above;
      sum_above += acc;
    } else {
      ++report.n_classes_below;
      sum_below += acc;
    }
  }
  if (report.n_classes_above) {
    report.mean_accuracy_above = sum_above / static_cast<double>(report.n_classes_above);
  }
  if (report.n_classes_below) {
    report.mean_accuracy_below = sum_below / static_cast<double>(report.n_classes_below);
  }
  return report;
}

std::string EvaluationReport::ToJson() const {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["tau"] = tau;
  j["n_ground_truth"] = n_ground_truth;
  j["n_retrieved"] = n_retrieved;
  j["n_correct"] = n_correct;
  j["retrieval_rate"] = retrieval_rate;
  j["accuracy"] = accuracy;
  j["class_accuracy_threshold"] = class_accuracy_threshold;
  j["n_classes_above"] = n_classes_above;
  j["n_classes_below"] = n_classes_below;
  j["n_classes_unretrieved"] = n_classes_unretrieved;
  j["mean_accuracy_above"] = opt(mean_accuracy_above);
  j["mean_accuracy_below"] = opt(mean_accuracy_below);
  json classes = json::object();
  for (const auto& [label, cls] : per_class) {
    classes[label] = {{"n_ground_truth", cls.n_ground_truth},
                      {"n_retrieved", cls.n_retrieved},
                      {"n_correct", cls.n_correct},
                      {"accuracy", opt(cls.accuracy)}};
  }
  j["per_class"] = classes;
  return j.dump(2) + "\n";
}

std::string ScoredCsv(const std::vector<ScoredClip>& scored) {
  std::string out = "clip_id,label_id,score\n";
  for (const auto& s : scored) out += CsvLine({s.clip_id, s.label_id, FormatFixed(s.score, 6)});
  return out;
}

std::vector<ScoredClip> ParseScoredCsv(std::string_view text) {
  CsvTable table(text);
  const std::size_t c_clip = table.column("clip_id");
  const std::size_t c_label = table.column("label_id");
  const std::size_t c_score = table.column("score");
  std::vector<ScoredClip> out;
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto& row = table.rows()[r];
    ScoredClip s{row[c_clip], row[c_label], 0.0};
    const std::string& field = row[c_score];
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), s.score);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw CsvError("invalid score '" + field + "'", r + 2);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace clipcurate
