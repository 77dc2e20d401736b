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

#ifndef CLIPCURATE_ONTOLOGY_H_
#define CLIPCURATE_ONTOLOGY_H_

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace clipcurate {

struct OntologyNode {
  std::string id;
  std::string name;
  std::string description;
  std::vector<std::string> child_ids;
};

class OntologyError : public std::runtime_error {
 public:
  enum class Kind { kParse, kIntegrity, kCycle, kLookup };

  OntologyError(Kind kind, std::string subject, const std::string& what)
      : std::runtime_error(what), kind_(kind), subject_(std::move(subject)) {}

  Kind kind() const { return kind_; }
  // Offending id, or the record index for parse errors.
  const std::string& subject() const { return subject_; }

 private:
  Kind kind_;
  std::string subject_;
};

// Class ontology as a DAG. Immutable after construction, so concurrent reads
// need no synchronisation.
class Ontology {
 public:
  // Parses the published ontology JSON: an array of records carrying at least
  // "id", "name" and "child_ids". Referential integrity and acyclicity are
  // verified before returning.
  static Ontology Parse(std::string_view json_text);
  static Ontology Load(const std::filesystem::path& path);

  explicit Ontology(std::vector<OntologyNode> nodes);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<OntologyNode>& nodes() const { return nodes_; }
  bool contains(std::string_view id) const;
  const OntologyNode& node(std::string_view id) const;

  // Every id reachable through child edges, excluding id itself. Depth-first
  // preorder with children visited in stored order; each id appears once even
  // when reachable along several paths.
  std::vector<std::string> Descendants(std::string_view id) const;

  // Every id from which id is reachable, in breadth-first order.
  std::vector<std::string> Ancestors(std::string_view id) const;

  // True when descendant is reachable from ancestor (strictly).
  bool IsAncestor(std::string_view ancestor, std::string_view descendant) const;

 private:
  std::size_t IndexOf(std::string_view id) const;

  std::vector<OntologyNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::vector<std::size_t>> parents_;
};

// Working label vocabulary, held in canonical (lexicographic id) order.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> ids);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  bool contains(std::string_view id) const;
  // Position in canonical order; throws OntologyError (kLookup) if absent.
  std::size_t IndexOf(std::string_view id) const;

  // One id per line. Blank lines and lines starting with '#' are skipped.
  static LabelSet Read(const std::filesystem::path& path);
  std::string ToText() const;

  bool operator==(const LabelSet& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
};

// Removes every candidate that has another candidate among its descendants.
// A multi-parent node counts as a descendant if any path reaches it.
LabelSet PruneAncestors(const std::vector<std::string>& candidates, const Ontology& ontology);

}  // namespace clipcurate

#endif  // CLIPCURATE_ONTOLOGY_H_
