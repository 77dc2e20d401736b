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

#ifndef CLIPCURATE_ANNOTATION_SERVICE_H_
#define CLIPCURATE_ANNOTATION_SERVICE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "clipcurate/manifest.h"
#include "clipcurate/noise_lab.h"
#include "clipcurate/ontology.h"

namespace clipcurate {

class AnnotationError : public std::runtime_error {
 public:
  enum class Kind { kNotFound, kConflict, kInvalid, kEmpty };

  AnnotationError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Session {
  std::string session_id;
  std::string annotator_id;
  std::uint64_t seed = 0;
  std::vector<std::string> sample;  // clip ids, duplicates allowed
  std::size_t cursor = 0;

  bool done() const { return cursor == sample.size(); }
};

struct Judgment {
  std::string session_id;
  std::size_t position = 0;
  std::string clip_id;
  Category category = Category::kPP;
  std::string timestamp;
};

struct ReferenceClip {
  std::string clip_id;
  std::string audio_url;
};

struct AnnotationItem {
  std::string session_id;
  std::size_t position = 0;
  std::size_t total = 0;
  std::string clip_id;
  std::string audio_url;
  std::string label_id;
  std::string label_name;
  std::string label_description;
  std::vector<ReferenceClip> references;
};

struct JudgmentAck {
  std::size_t cursor = 0;
  bool duplicate = false;
};

struct EstimateResult {
  std::array<std::size_t, kNumCategories> counts{};
  JudgmentTable table;
  NoiseEstimate estimate;
};

// Draws size clip ids from the manifest uniformly with replacement. Entries are
// taken in canonical order before drawing, so the result depends only on the
// manifest contents and the seed.
std::vector<std::string> SampleClips(const DatasetManifest& manifest, std::size_t size,
                                     std::uint64_t seed);

// Parses a judgments.jsonl file. Missing file means no judgments.
std::vector<Judgment> ReadJudgmentLog(const std::filesystem::path& path);

// Pools judgments into counts and hands them to NoiseBreakdown.
EstimateResult EstimateFromJudgments(const std::vector<Judgment>& judgments);

std::string SessionToJson(const Session& session);
std::string ItemToJson(const AnnotationItem& item);
std::string EstimateToJson(const EstimateResult& result);

// Sessions and judgments for one audit. State lives in two append-only JSONL
// files under a directory: sessions.jsonl and judgments.jsonl. Opening a store
// replays both files.
class AnnotationStore {
 public:
  // audited is the dataset being checked; clean supplies the reference clips.
  AnnotationStore(DatasetManifest audited, DatasetManifest clean, Ontology ontology,
                  std::filesystem::path state_dir, std::size_t references_per_item = 3);

  Session CreateSession(std::size_t sample_size, const std::string& annotator_id,
                        std::uint64_t seed);
  std::optional<Session> FindSession(const std::string& session_id) const;
  std::vector<Session> Sessions() const;

  // nullopt once every position has a judgment.
  std::optional<AnnotationItem> NextItem(const std::string& session_id) const;

  JudgmentAck RecordJudgment(const std::string& session_id, std::size_t position,
                             const std::string& category);

  std::vector<Judgment> Judgments() const;
  EstimateResult ComputeEstimate() const;

  const std::filesystem::path& sessions_path() const { return sessions_path_; }
  const std::filesystem::path& judgments_path() const { return judgments_path_; }

  // Timestamp source, replaceable in tests.
  std::function<std::string()> clock;

 private:
  void Replay();

  DatasetManifest audited_;
  DatasetManifest clean_;
  Ontology ontology_;
  std::size_t references_per_item_;
  std::filesystem::path sessions_path_;
  std::filesystem::path judgments_path_;
  std::map<std::string, const ManifestEntry*> by_clip_;
  std::map<std::string, std::vector<std::string>> references_;

  mutable std::shared_mutex mu_;
  std::map<std::string, Session> sessions_;
  std::vector<Judgment> judgments_;
};

struct ServerOptions {
  std::filesystem::path audio_dir;
  std::filesystem::path static_dir;  // optional UI bundle mounted at /
  std::string token;                 // shared token; empty disables the check
};

// HTTP front end for an AnnotationStore.
//   POST /sessions                 {"annotator_id", "sample_size", "seed"}
//   GET  /sessions/{id}
//   GET  /sessions/{id}/next
//   POST /sessions/{id}/judgments  {"position", "category"}
//   GET  /estimate
//   GET  /audio/<clip>.wav
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, ServerOptions options);
  ~AnnotationServer();

  // Blocks until Stop().
  bool Listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it, or -1.
  int Bind(const std::string& host);
  // Blocks serving on a port obtained from Bind().
  bool ListenAfterBind();
  void Stop();
  void WaitUntilReady() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace clipcurate

#endif  // CLIPCURATE_ANNOTATION_SERVICE_H_
