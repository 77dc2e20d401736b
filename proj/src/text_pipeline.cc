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

#include "clipcurate/text_pipeline.h"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <sstream>
#include <tuple>

#include "clipcurate/util.h"

namespace clipcurate {

namespace {

bool IsWordChar(UChar32 c) {
  if (c < 0) return false;
  if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  if (u_isalpha(c)) return true;
  // Combining marks stay attached to the letter they modify.
  int8_t type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK;
}

void AppendUtf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

std::size_t CodePointLength(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string Trim(std::string s) {
  const char* ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  s.erase(s.find_last_not_of(ws) + 1);
  return s;
}

}  // namespace

std::vector<std::string> Tokenise(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (IsWordChar(c)) {
      current.append(text.substr(static_cast<std::size_t>(start),
                                 static_cast<std::size_t>(i - start)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string FoldCase(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(word.data());
  const auto length = static_cast<int32_t>(word.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) continue;
    if (c < 0x80) {
      out.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + ('a' - 'A') : c));
    } else {
      AppendUtf8(out, u_foldCase(c, U_FOLD_CASE_DEFAULT));
    }
  }
  return out;
}

std::vector<std::string> TagWords(const std::vector<std::string>& tags) {
  std::vector<std::string> words;
  for (const auto& tag : tags) {
    for (auto& w : Tokenise(tag)) words.push_back(std::move(w));
  }
  return words;
}

LemmaLexicon LemmaLexicon::Parse(std::string_view tsv) {
  LemmaLexicon lexicon;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= tsv.size()) {
    std::size_t end = tsv.find('\n', pos);
    if (end == std::string_view::npos) end = tsv.size();
    std::string_view line = tsv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (end == tsv.size()) break;
      continue;
    }
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos) {
      throw LexiconError("lexicon line " + std::to_string(line_no) +
                         ": expected 3 tab-separated columns");
    }
    std::string_view word = line.substr(0, t1);
    std::string_view lemma = line.substr(t2 + 1);
    if (word.empty() || lemma.empty()) {
      throw LexiconError("lexicon line " + std::to_string(line_no) + ": empty word or lemma");
    }
    lexicon.Add(word, line.substr(t1 + 1, t2 - t1 - 1), lemma);
    if (end == tsv.size()) break;
  }
  return lexicon;
}

LemmaLexicon LemmaLexicon::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path));
}

void LemmaLexicon::Add(std::string_view word, std::string_view pos, std::string_view lemma) {
  std::string w = FoldCase(word);
  std::string l = FoldCase(lemma);
  Entry& entry = entries_[w];
  entry.analyses.emplace_back(std::string(pos), l);
  auto key = [](const std::string& s) { return std::make_tuple(CodePointLength(s), s); };
  if (entry.best.empty() || key(l) < key(entry.best)) entry.best = l;
}

const std::string& LemmaLexicon::Lemmatise(const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? word : it->second.best;
}

const std::vector<std::pair<std::string, std::string>>* LemmaLexicon::Lookup(
    const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second.analyses;
}

StopWords::StopWords(const std::vector<std::string>& words) {
  for (const auto& w : words) words_.insert(FoldCase(w));
}

StopWords StopWords::Load(const std::filesystem::path& path) {
  std::istringstream in(ReadFile(path));
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    line = Trim(std::move(line));
    if (line.empty() || line.front() == '#') continue;
    words.push_back(line);
  }
  return StopWords(words);
}

Document Preprocess(const std::vector<std::string>& tokens, const LemmaLexicon& lexicon,
                    const StopWords& stop_words, DocumentOrigin origin) {
  Document doc;
  doc.origin = origin;
  std::unordered_set<std::string> seen;
  for (const auto& token : tokens) {
    std::string folded = FoldCase(token);
    if (folded.empty()) continue;
    const std::string& lemma = lexicon.Lemmatise(folded);
    if (stop_words.contains(lemma)) continue;
    if (seen.insert(lemma).second) doc.words.push_back(lemma);
  }
  return doc;
}

Document TextPipeline::Tags(const std::vector<std::string>& tags) const {
  return Preprocess(TagWords(tags), lexicon_, stop_words_, DocumentOrigin::kTags);
}

Document TextPipeline::Description(std::string_view text) const {
  return Preprocess(Tokenise(text), lexicon_, stop_words_, DocumentOrigin::kDescription);
}

Document TextPipeline::Label(std::string_view name) const {
  return Preprocess(Tokenise(name), lexicon_, stop_words_, DocumentOrigin::kLabel);
}

}  // namespace clipcurate
