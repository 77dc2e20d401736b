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

#ifndef CLIPCURATE_TEXT_PIPELINE_H_
#define CLIPCURATE_TEXT_PIPELINE_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace clipcurate {

enum class DocumentOrigin { kTags, kDescription, kLabel };

// A preprocessed word sequence: lowercase, lemmatised, no stop words and no
// duplicates, in first-occurrence order.
struct Document {
  std::vector<std::string> words;
  DocumentOrigin origin = DocumentOrigin::kDescription;

  bool operator==(const Document& other) const {
    return words == other.words && origin == other.origin;
  }
};

class LexiconError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// word -> {(part of speech, lemma)} loaded from a word/pos/lemma TSV.
class LemmaLexicon {
 public:
  LemmaLexicon() = default;

  static LemmaLexicon Parse(std::string_view tsv);
  static LemmaLexicon Load(const std::filesystem::path& path);

  // Words and lemmas are case-folded on insertion.
  void Add(std::string_view word, std::string_view pos, std::string_view lemma);

  // Shortest lemma over every (pos, lemma) pair of word, ties broken
  // lexicographically. Words missing from the lexicon come back unchanged.
  const std::string& Lemmatise(const std::string& word) const;

  const std::vector<std::pair<std::string, std::string>>* Lookup(const std::string& word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::vector<std::pair<std::string, std::string>> analyses;
    std::string best;
  };
  std::unordered_map<std::string, Entry> entries_;
};

class StopWords {
 public:
  StopWords() = default;
  explicit StopWords(const std::vector<std::string>& words);

  // One word per line; blank lines and '#' comments are skipped.
  static StopWords Load(const std::filesystem::path& path);

  bool contains(const std::string& word) const { return words_.count(word) > 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

// Splits on every non-letter code point (digits, punctuation, whitespace,
// symbols) and drops empty fragments. Letters outside ASCII are kept. Invalid
// UTF-8 bytes act as separators.
std::vector<std::string> Tokenise(std::string_view text);

// Simple (one-to-one) Unicode case folding of every code point.
std::string FoldCase(std::string_view word);

// Breaks each tag into words. Multi-word and hyphenated tags are split; tags
// made only of digits or symbols vanish.
std::vector<std::string> TagWords(const std::vector<std::string>& tags);

// lowercase -> lemmatise -> drop stop words -> drop repeats.
Document Preprocess(const std::vector<std::string>& tokens, const LemmaLexicon& lexicon,
                    const StopWords& stop_words, DocumentOrigin origin);

// Bundles a lexicon and stop list for the three document kinds.
class TextPipeline {
 public:
  TextPipeline(LemmaLexicon lexicon, StopWords stop_words)
      : lexicon_(std::move(lexicon)), stop_words_(std::move(stop_words)) {}

  Document Tags(const std::vector<std::string>& tags) const;
  Document Description(std::string_view text) const;
  Document Label(std::string_view name) const;

  const LemmaLexicon& lexicon() const { return lexicon_; }
  const StopWords& stop_words() const { return stop_words_; }

 private:
  LemmaLexicon lexicon_;
  StopWords stop_words_;
};

}  // namespace clipcurate

#endif  // CLIPCURATE_TEXT_PIPELINE_H_
