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

#include "clipcurate/ontology.h"

#include <algorithm>
#include <deque>
#include <sstream>

#include "clipcurate/util.h"
#include "json.hpp"

namespace clipcurate {

using json = nlohmann::json;

namespace {

std::string RequireString(const json& record, const char* key, std::size_t index,
                          bool required) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) {
    if (!required) return {};
    throw OntologyError(OntologyError::Kind::kParse, std::to_string(index),
                        "ontology record " + std::to_string(index) + ": missing field '" +
                            key + "'");
  }
  if (!it->is_string()) {
    throw OntologyError(OntologyError::Kind::kParse, std::to_string(index),
                        "ontology record " + std::to_string(index) + ": field '" + key +
                            "' is not a string");
  }
  return it->get<std::string>();
}

}  // namespace

Ontology Ontology::Parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw OntologyError(OntologyError::Kind::kParse, "-",
                        std::string("ontology is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) {
    throw OntologyError(OntologyError::Kind::kParse, "-", "ontology must be a JSON array");
  }
  std::vector<OntologyNode> nodes;
  nodes.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& rec = doc[i];
    if (!rec.is_object()) {
      throw OntologyError(OntologyError::Kind::kParse, std::to_string(i),
                          "ontology record " + std::to_string(i) + " is not an object");
    }
    OntologyNode node;
    node.id = RequireString(rec, "id", i, true);
    node.name = RequireString(rec, "name", i, true);
    node.description = RequireString(rec, "description", i, false);
    auto children = rec.find("child_ids");
    if (children == rec.end() || !children->is_array()) {
      throw OntologyError(OntologyError::Kind::kParse, std::to_string(i),
                          "ontology record " + std::to_string(i) +
                              ": missing or non-array field 'child_ids'");
    }
    for (const json& child : *children) {
      if (!child.is_string()) {
        throw OntologyError(OntologyError::Kind::kParse, std::to_string(i),
                            "ontology record " + std::to_string(i) +
                                ": child id is not a string");
      }
      node.child_ids.push_back(child.get<std::string>());
    }
    nodes.push_back(std::move(node));
  }
  return Ontology(std::move(nodes));
}

Ontology Ontology::Load(const std::filesystem::path& path) { return Parse(ReadFile(path)); }

Ontology::Ontology(std::vector<OntologyNode> nodes) : nodes_(std::move(nodes)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) {
      throw OntologyError(OntologyError::Kind::kIntegrity, nodes_[i].id,
                          "duplicate ontology id '" + nodes_[i].id + "'");
    }
  }
  children_.resize(nodes_.size());
  parents_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (const std::string& child : nodes_[i].child_ids) {
      auto it = index_.find(child);
      if (it == index_.end()) {
        throw OntologyError(OntologyError::Kind::kIntegrity, child,
                            "node '" + nodes_[i].id + "' references unknown child '" + child +
                                "'");
      }
      children_[i].push_back(it->second);
      parents_[it->second].push_back(i);
    }
  }

  // Iterative three-colour DFS for cycle detection.
  enum : char { kWhite, kGrey, kBlack };
  std::vector<char> colour(nodes_.size(), kWhite);
  for (std::size_t root = 0; root < nodes_.size(); ++root) {
    if (colour[root] != kWhite) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = kGrey;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < children_[v].size()) {
        std::size_t c = children_[v][next++];
        if (colour[c] == kGrey) {
          throw OntologyError(OntologyError::Kind::kCycle, nodes_[c].id,
                              "ontology contains a cycle through '" + nodes_[c].id + "'");
        }
        if (colour[c] == kWhite) {
          colour[c] = kGrey;
          stack.emplace_back(c, 0);
        }
      } else {
        colour[v] = kBlack;
        stack.pop_back();
      }
    }
  }
}

bool Ontology::contains(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

std::size_t Ontology::IndexOf(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    throw OntologyError(OntologyError::Kind::kLookup, std::string(id),
                        "unknown ontology id '" + std::string(id) + "'");
  }
  return it->second;
}

const OntologyNode& Ontology::node(std::string_view id) const { return nodes_[IndexOf(id)]; }

std::vector<std::string> Ontology::Descendants(std::string_view id) const {
  const std::size_t start = IndexOf(id);
  std::vector<char> seen(nodes_.size(), 0);
  seen[start] = 1;
  std::vector<std::string> out;
  std::vector<std::size_t> stack(children_[start].rbegin(), children_[start].rend());
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    if (seen[v]) continue;
    seen[v] = 1;
    out.push_back(nodes_[v].id);
    for (auto it = children_[v].rbegin(); it != children_[v].rend(); ++it) {
      if (!seen[*it]) stack.push_back(*it);
    }
  }
  return out;
}

std::vector<std::string> Ontology::Ancestors(std::string_view id) const {
  const std::size_t start = IndexOf(id);
  std::vector<char> seen(nodes_.size(), 0);
  seen[start] = 1;
  std::vector<std::string> out;
  std::deque<std::size_t> queue(parents_[start].begin(), parents_[start].end());
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    if (seen[v]) continue;
    seen[v] = 1;
    out.push_back(nodes_[v].id);
    for (std::size_t p : parents_[v]) {
      if (!seen[p]) queue.push_back(p);
    }
  }
  return out;
}

bool Ontology::IsAncestor(std::string_view ancestor, std::string_view descendant) const {
  const std::size_t from = IndexOf(ancestor);
  const std::size_t to = IndexOf(descendant);
  if (from == to) return false;
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<std::size_t> stack(children_[from].begin(), children_[from].end());
  while (!stack.empty()) {
    std::size_t v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    if (seen[v]) continue;
    seen[v] = 1;
    stack.insert(stack.end(), children_[v].begin(), children_[v].end());
  }
  return false;
}

LabelSet::LabelSet(std::vector<std::string> ids) : labels_(std::move(ids)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
}

bool LabelSet::contains(std::string_view id) const {
  return std::binary_search(labels_.begin(), labels_.end(), id);
}

std::size_t LabelSet::IndexOf(std::string_view id) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), id);
  if (it == labels_.end() || *it != id) {
    throw OntologyError(OntologyError::Kind::kLookup, std::string(id),
                        "label '" + std::string(id) + "' is not in the label set");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

LabelSet LabelSet::Read(const std::filesystem::path& path) {
  std::istringstream in(ReadFile(path));
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') continue;
    ids.push_back(line);
  }
  return LabelSet(std::move(ids));
}

std::string LabelSet::ToText() const {
  std::string out;
  for (const auto& id : labels_) {
    out += id;
    out.push_back('\n');
  }
  return out;
}

LabelSet PruneAncestors(const std::vector<std::string>& candidates, const Ontology& ontology) {
  LabelSet unique(candidates);
  for (const auto& id : unique.labels()) ontology.node(id);
  std::vector<std::string> kept;
  for (const auto& id : unique.labels()) {
    bool has_candidate_descendant = false;
    for (const auto& d : ontology.Descendants(id)) {
      if (unique.contains(d)) {
        has_candidate_descendant = true;
        break;
      }
    }
    if (!has_candidate_descendant) kept.push_back(id);
  }
  return LabelSet(std::move(kept));
}

}  // namespace clipcurate
