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

#include "clipcurate/annotation_service.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>

#include <openssl/crypto.h>

#include "clipcurate/rng.h"
#include "clipcurate/util.h"
#include "httplib.h"
#include "json.hpp"

namespace clipcurate {

using json = nlohmann::json;

namespace {

std::string UtcNow() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string AudioUrl(const std::string& clip_id) { return "/audio/" + clip_id + ".wav"; }

void AppendLine(const std::filesystem::path& path, const std::string& line) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app | std::ios::binary);
  out << line << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot append to '" + path.string() + "'");
}

json SessionJson(const Session& s) {
  return {{"session_id", s.session_id},
          {"annotator_id", s.annotator_id},
          {"seed", s.seed},
          {"sample", s.sample},
          {"cursor", s.cursor},
          {"total", s.sample.size()},
          {"done", s.done()}};
}

json EstimateJson(const EstimateResult& r) {
  json counts = json::object();
  json proportions = json::object();
  json cells = json::object();
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    const std::string name(CategoryName(static_cast<Category>(i)));
    counts[name] = r.counts[i];
    proportions[name] = r.table.proportions[i];
    cells[name] = r.estimate.cell_half_widths[i];
  }
  auto rate = [](const RateEstimate& e) {
    return json{{"rate", e.rate}, {"half_width", e.half_width}};
  };
  return {{"n", r.table.n},
          {"n_decided", r.estimate.n_decided},
          {"counts", counts},
          {"proportions", proportions},
          {"cell_half_widths", cells},
          {"confidence", r.estimate.confidence},
          {"noise_rate_pnp_incorrect", rate(r.estimate.pnp_incorrect)},
          {"noise_rate_pnp_correct", rate(r.estimate.pnp_correct)},
          {"oov_share", r.estimate.oov_share}};
}

}  // namespace

std::vector<std::string> SampleClips(const DatasetManifest& manifest, std::size_t size,
                                     std::uint64_t seed) {
  if (manifest.entries.empty()) {
    throw AnnotationError(AnnotationError::Kind::kEmpty, "manifest has no clips to sample");
  }
  if (size == 0) throw AnnotationError(AnnotationError::Kind::kInvalid, "sample size must be >= 1");
  std::vector<ManifestEntry> entries = manifest.entries;
  std::sort(entries.begin(), entries.end(), CanonicalEntryLess);
  SeededRng rng(seed);
  std::vector<std::string> out;
  out.reserve(size);
  for (std::size_t i : rng.SampleWithReplacement(entries.size(), size)) {
    out.push_back(entries[i].clip_id);
  }
  return out;
}

std::vector<Judgment> ReadJudgmentLog(const std::filesystem::path& path) {
  std::vector<Judgment> out;
  if (!std::filesystem::exists(path)) return out;
  std::ifstream in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Judgment jd;
    try {
      json j = json::parse(line);
      jd.session_id = j.at("session_id").get<std::string>();
      jd.position = j.at("position").get<std::size_t>();
      jd.clip_id = j.at("clip_id").get<std::string>();
      auto category = ParseCategory(j.at("category").get<std::string>());
      if (!category) throw std::runtime_error("unknown category");
      jd.category = *category;
      jd.timestamp = j.value("timestamp", "");
    } catch (const std::exception& e) {
      throw std::runtime_error("corrupt judgment log '" + path.string() + "' line " +
                               std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(jd));
  }
  return out;
}

EstimateResult EstimateFromJudgments(const std::vector<Judgment>& judgments) {
  if (judgments.empty()) {
    throw AnnotationError(AnnotationError::Kind::kEmpty, "no judgments recorded yet");
  }
  EstimateResult r;
  for (const auto& j : judgments) ++r.counts[static_cast<std::size_t>(j.category)];
  if (r.counts[static_cast<std::size_t>(Category::kUnsure)] == judgments.size()) {
    throw AnnotationError(AnnotationError::Kind::kEmpty,
                          "every judgment is Unsure; noise rate is undefined");
  }
  r.table = JudgmentTable::FromCounts(r.counts);
  r.estimate = NoiseBreakdown(r.table);
  return r;
}

std::string SessionToJson(const Session& session) { return SessionJson(session).dump(); }

std::string ItemToJson(const AnnotationItem& item) {
  json refs = json::array();
  for (const auto& r : item.references) {
    refs.push_back({{"clip_id", r.clip_id}, {"audio_url", r.audio_url}});
  }
  return json{{"done", false},
              {"session_id", item.session_id},
              {"position", item.position},
              {"total", item.total},
              {"clip_id", item.clip_id},
              {"audio_url", item.audio_url},
              {"label_id", item.label_id},
              {"label_name", item.label_name},
              {"label_description", item.label_description},
              {"references", refs}}
      .dump();
}

std::string EstimateToJson(const EstimateResult& result) { return EstimateJson(result).dump(); }

AnnotationStore::AnnotationStore(DatasetManifest audited, DatasetManifest clean,
                                 Ontology ontology, std::filesystem::path state_dir,
                                 std::size_t references_per_item)
    : clock(UtcNow),
      audited_(std::move(audited)),
      clean_(std::move(clean)),
      ontology_(std::move(ontology)),
      references_per_item_(references_per_item),
      sessions_path_(state_dir / "sessions.jsonl"),
      judgments_path_(state_dir / "judgments.jsonl") {
  audited_.Validate();
  for (const auto& e : audited_.entries) by_clip_[e.clip_id] = &e;
  std::map<std::string, std::vector<std::string>> pools;
  for (const auto& e : clean_.entries) pools[e.label_id].push_back(e.clip_id);
  for (auto& [label, ids] : pools) {
    std::sort(ids.begin(), ids.end(), ClipIdLess);
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    references_[label] = std::move(ids);
  }
  std::filesystem::create_directories(state_dir);
  Replay();
}

void AnnotationStore::Replay() {
  auto lines = [](const std::filesystem::path& p) {
    std::vector<std::string> out;
    if (!std::filesystem::exists(p)) return out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) out.push_back(line);
    }
    return out;
  };
  for (const auto& line : lines(sessions_path_)) {
    try {
      json j = json::parse(line);
      Session s;
      s.session_id = j.at("session_id").get<std::string>();
      s.annotator_id = j.at("annotator_id").get<std::string>();
      s.seed = j.at("seed").get<std::uint64_t>();
      s.sample = j.at("sample").get<std::vector<std::string>>();
      sessions_[s.session_id] = std::move(s);
    } catch (const json::exception& e) {
      throw std::runtime_error("corrupt session log '" + sessions_path_.string() +
                               "': " + e.what());
    }
  }
  for (auto& jd : ReadJudgmentLog(judgments_path_)) {
    auto it = sessions_.find(jd.session_id);
    if (it == sessions_.end() || jd.position != it->second.cursor ||
        jd.position >= it->second.sample.size()) {
      throw std::runtime_error("judgment log out of order at session '" + jd.session_id +
                               "' position " + std::to_string(jd.position));
    }
    ++it->second.cursor;
    judgments_.push_back(std::move(jd));
  }
}

Session AnnotationStore::CreateSession(std::size_t sample_size, const std::string& annotator_id,
                                       std::uint64_t seed) {
  if (annotator_id.empty()) {
    throw AnnotationError(AnnotationError::Kind::kInvalid, "annotator_id is required");
  }
  Session s;
  s.annotator_id = annotator_id;
  s.seed = seed;
  s.sample = SampleClips(audited_, sample_size, seed);
  std::unique_lock lock(mu_);
  char id[32];
  std::snprintf(id, sizeof(id), "s%04zu", sessions_.size() + 1);
  s.session_id = id;
  json line = {{"session_id", s.session_id},
               {"annotator_id", s.annotator_id},
               {"seed", s.seed},
               {"sample", s.sample},
               {"created", clock()}};
  AppendLine(sessions_path_, line.dump());
  sessions_[s.session_id] = s;
  return s;
}

std::optional<Session> AnnotationStore::FindSession(const std::string& session_id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::vector<Session> AnnotationStore::Sessions() const {
  std::shared_lock lock(mu_);
  std::vector<Session> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

std::optional<AnnotationItem> AnnotationStore::NextItem(const std::string& session_id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw AnnotationError(AnnotationError::Kind::kNotFound, "unknown session '" + session_id + "'");
  }
  const Session& s = it->second;
  if (s.done()) return std::nullopt;
  AnnotationItem item;
  item.session_id = s.session_id;
  item.position = s.cursor;
  item.total = s.sample.size();
  item.clip_id = s.sample[s.cursor];
  item.audio_url = AudioUrl(item.clip_id);
  const ManifestEntry& entry = *by_clip_.at(item.clip_id);
  item.label_id = entry.label_id;
  item.label_name = entry.label_name;
  if (ontology_.contains(entry.label_id)) {
    item.label_description = ontology_.node(entry.label_id).description;
  }
  if (auto refs = references_.find(entry.label_id); refs != references_.end()) {
    for (const auto& id : refs->second) {
      if (item.references.size() == references_per_item_) break;
      if (id == item.clip_id) continue;
      item.references.push_back({id, AudioUrl(id)});
    }
  }
  return item;
}

JudgmentAck AnnotationStore::RecordJudgment(const std::string& session_id, std::size_t position,
                                            const std::string& category) {
  auto parsed = ParseCategory(category);
  if (!parsed) {
    throw AnnotationError(AnnotationError::Kind::kInvalid,
                          "invalid category '" + category + "'");
  }
  std::unique_lock lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw AnnotationError(AnnotationError::Kind::kNotFound, "unknown session '" + session_id + "'");
  }
  Session& s = it->second;
  if (position < s.cursor) {
    for (const auto& j : judgments_) {
      if (j.session_id == session_id && j.position == position) {
        if (j.category == *parsed) return {s.cursor, true};
        break;
      }
    }
    throw AnnotationError(AnnotationError::Kind::kConflict,
                          "position " + std::to_string(position) + " already judged");
  }
  if (position != s.cursor || position >= s.sample.size()) {
    throw AnnotationError(AnnotationError::Kind::kConflict,
                          "expected position " + std::to_string(s.cursor) + ", got " +
                              std::to_string(position));
  }
  Judgment j{session_id, position, s.sample[position], *parsed, clock()};
  json line = {{"session_id", j.session_id},
               {"position", j.position},
               {"clip_id", j.clip_id},
               {"category", CategoryName(j.category)},
               {"timestamp", j.timestamp}};
  AppendLine(judgments_path_, line.dump());
  judgments_.push_back(std::move(j));
  ++s.cursor;
  return {s.cursor, false};
}

std::vector<Judgment> AnnotationStore::Judgments() const {
  std::shared_lock lock(mu_);
  return judgments_;
}

EstimateResult AnnotationStore::ComputeEstimate() const {
  return EstimateFromJudgments(Judgments());
}

struct AnnotationServer::Impl {
  AnnotationStore& store;
  ServerOptions options;
  httplib::Server server;

  Impl(AnnotationStore& s, ServerOptions o) : store(s), options(std::move(o)) {}
};

namespace {

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& message) {
  SendJson(res, status, {{"error", message}});
}

int StatusFor(AnnotationError::Kind kind) {
  switch (kind) {
    case AnnotationError::Kind::kNotFound:
      return 404;
    case AnnotationError::Kind::kConflict:
    case AnnotationError::Kind::kEmpty:
      return 409;
    case AnnotationError::Kind::kInvalid:
      return 400;
  }
  return 400;
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
  auto& srv = impl_->server;
  Impl* impl = impl_.get();

  srv.set_pre_routing_handler([impl](const httplib::Request& req, httplib::Response& res) {
    if (impl->options.token.empty()) return httplib::Server::HandlerResponse::Unhandled;
    std::string given = req.get_header_value("X-Annotation-Token");
    const std::string auth = req.get_header_value("Authorization");
    if (given.empty() && auth.rfind("Bearer ", 0) == 0) given = auth.substr(7);
    if (given.empty() && req.has_param("token")) given = req.get_param_value("token");
    const std::string& want = impl->options.token;
    if (given.size() == want.size() &&
        CRYPTO_memcmp(given.data(), want.data(), want.size()) == 0) {
      return httplib::Server::HandlerResponse::Unhandled;
    }
    SendError(res, 401, "missing or wrong token");
    return httplib::Server::HandlerResponse::Handled;
  });

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                               std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const AnnotationError& e) {
      SendError(res, StatusFor(e.kind()), e.what());
    } catch (const json::exception& e) {
      SendError(res, 400, std::string("bad request body: ") + e.what());
    } catch (const std::exception& e) {
      SendError(res, 500, e.what());
    }
  });

  srv.Post("/sessions", [impl](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body);
    const auto size = body.at("sample_size").get<std::size_t>();
    const auto annotator = body.at("annotator_id").get<std::string>();
    const auto seed = body.value("seed", std::uint64_t{0});
    SendJson(res, 201, SessionJson(impl->store.CreateSession(size, annotator, seed)));
  });

  srv.Get(R"(/sessions/([^/]+))", [impl](const httplib::Request& req, httplib::Response& res) {
    auto s = impl->store.FindSession(req.matches[1]);
    if (!s) throw AnnotationError(AnnotationError::Kind::kNotFound, "unknown session");
    SendJson(res, 200, SessionJson(*s));
  });

  srv.Get(R"(/sessions/([^/]+)/next)", [impl](const httplib::Request& req,
                                              httplib::Response& res) {
    const std::string id = req.matches[1];
    auto item = impl->store.NextItem(id);
    if (!item) {
      auto s = impl->store.FindSession(id);
      SendJson(res, 200, {{"done", true}, {"session_id", id},
                          {"total", s ? s->sample.size() : 0}});
      return;
    }
    res.status = 200;
    res.set_content(ItemToJson(*item), "application/json");
  });

  srv.Post(R"(/sessions/([^/]+)/judgments)", [impl](const httplib::Request& req,
                                                    httplib::Response& res) {
    json body = json::parse(req.body);
    JudgmentAck ack = impl->store.RecordJudgment(
        req.matches[1], body.at("position").get<std::size_t>(),
        body.at("category").get<std::string>());
    SendJson(res, 200, {{"cursor", ack.cursor}, {"duplicate", ack.duplicate}});
  });

  srv.Get("/estimate", [impl](const httplib::Request&, httplib::Response& res) {
    SendJson(res, 200, EstimateJson(impl->store.ComputeEstimate()));
  });

  if (!impl_->options.audio_dir.empty()) {
    srv.set_mount_point("/audio", impl_->options.audio_dir.string());
  }
  if (!impl_->options.static_dir.empty()) {
    srv.set_mount_point("/", impl_->options.static_dir.string());
  }
}

AnnotationServer::~AnnotationServer() { Stop(); }

bool AnnotationServer::Listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int AnnotationServer::Bind(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool AnnotationServer::ListenAfterBind() { return impl_->server.listen_after_bind(); }

void AnnotationServer::Stop() { impl_->server.stop(); }

void AnnotationServer::WaitUntilReady() const { impl_->server.wait_until_ready(); }

}  // namespace clipcurate
