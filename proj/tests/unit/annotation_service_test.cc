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
#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "clipcurate/noise_lab.h"
#include "clipcurate/ontology.h"
#include "clipcurate/util.h"
#include "clipcurate/wav.h"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

namespace clipcurate {
namespace {

using json = nlohmann::json;

constexpr const char* kBark = "/m/05tny_";
constexpr const char* kAcoustic = "/m/042v_gx";

std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("clipcurate_ann_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

DatasetManifest Manifest(const std::string& name, int first_id, int per_class) {
  DatasetManifest m;
  m.name = name;
  int id = first_id;
  for (int i = 0; i < per_class; ++i) {
    m.entries.push_back({std::to_string(id++), kBark, "Bark", Split::kTrain});
  }
  for (int i = 0; i < per_class; ++i) {
    m.entries.push_back({std::to_string(id++), kAcoustic, "Acoustic guitar", Split::kTrain});
  }
  return m;
}

Ontology FixtureOntology() {
  return Ontology::Load(std::string(CLIPCURATE_FIXTURE_DIR) + "/ontology.json");
}

std::unique_ptr<AnnotationStore> Store(const std::filesystem::path& dir) {
  auto store = std::make_unique<AnnotationStore>(Manifest("noisy", 100, 10),
                                                 Manifest("clean", 1, 5), FixtureOntology(), dir);
  store->clock = [] { return std::string("2026-01-01T00:00:00Z"); };
  return store;
}

std::array<std::size_t, kNumCategories> Tally(const std::vector<Category>& script) {
  std::array<std::size_t, kNumCategories> counts{};
  for (Category c : script) ++counts[static_cast<std::size_t>(c)];
  return counts;
}

TEST_CASE("sampling is seeded and uses the audited manifest") {
  auto m = Manifest("noisy", 100, 10);
  auto a = SampleClips(m, 50, 7);
  CHECK(a.size() == 50);
  CHECK(a == SampleClips(m, 50, 7));
  CHECK(a != SampleClips(m, 50, 8));
  auto shuffled = m;
  std::shuffle(shuffled.entries.begin(), shuffled.entries.end(), std::mt19937(3));
  CHECK(SampleClips(shuffled, 50, 7) == a);
  for (const auto& id : a) CHECK(std::stoi(id) >= 100);
  CHECK_THROWS(SampleClips(DatasetManifest{}, 3, 1));
}

TEST_CASE("sessions and items") {
  auto dir = TempDir("sessions");
  auto store = Store(dir);
  Session s = store->CreateSession(5, "alice", 11);
  CHECK(s.session_id == "s0001");
  CHECK(s.sample.size() == 5);
  CHECK(s.cursor == 0);
  CHECK(store->CreateSession(3, "bob", 1).session_id == "s0002");
  CHECK(store->Sessions().size() == 2);

  auto item = store->NextItem(s.session_id);
  REQUIRE(item);
  CHECK(item->position == 0);
  CHECK(item->total == 5);
  CHECK(item->clip_id == s.sample[0]);
  CHECK(item->audio_url == "/audio/" + s.sample[0] + ".wav");
  const bool bark = std::stoi(item->clip_id) < 110;
  CHECK(item->label_id == (bark ? kBark : kAcoustic));
  CHECK(item->label_name == (bark ? "Bark" : "Acoustic guitar"));
  CHECK_FALSE(item->label_description.empty());
  REQUIRE(item->references.size() == 3);
  const std::vector<std::string> want = bark ? std::vector<std::string>{"1", "2", "3"}
                                             : std::vector<std::string>{"6", "7", "8"};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(item->references[i].clip_id == want[i]);
    CHECK(item->references[i].audio_url == "/audio/" + want[i] + ".wav");
  }
  CHECK_THROWS_AS(store->NextItem("s9999"), AnnotationError);
  CHECK_FALSE(store->FindSession("s9999"));
  CHECK_THROWS(store->CreateSession(0, "carol", 1));
}

TEST_CASE("judgments advance the cursor") {
  auto dir = TempDir("judgments");
  auto store = Store(dir);
  Session s = store->CreateSession(3, "alice", 1);
  CHECK(store->RecordJudgment(s.session_id, 0, "PP").cursor == 1);

  SUBCASE("resubmitting the same verdict is a no-op") {
    auto ack = store->RecordJudgment(s.session_id, 0, "PP");
    CHECK(ack.duplicate);
    CHECK(ack.cursor == 1);
    CHECK(store->Judgments().size() == 1);
  }
  SUBCASE("a different verdict for a judged position conflicts") {
    try {
      store->RecordJudgment(s.session_id, 0, "NP/OOV");
      FAIL("expected a conflict");
    } catch (const AnnotationError& e) {
      CHECK(e.kind() == AnnotationError::Kind::kConflict);
    }
  }
  SUBCASE("skipping ahead conflicts") {
    try {
      store->RecordJudgment(s.session_id, 2, "PP");
      FAIL("expected a conflict");
    } catch (const AnnotationError& e) {
      CHECK(e.kind() == AnnotationError::Kind::kConflict);
    }
  }
  SUBCASE("unknown categories and sessions") {
    try {
      store->RecordJudgment(s.session_id, 1, "Maybe");
      FAIL("expected invalid");
    } catch (const AnnotationError& e) {
      CHECK(e.kind() == AnnotationError::Kind::kInvalid);
    }
    try {
      store->RecordJudgment("s0404", 0, "PP");
      FAIL("expected not found");
    } catch (const AnnotationError& e) {
      CHECK(e.kind() == AnnotationError::Kind::kNotFound);
    }
  }
  SUBCASE("completion") {
    store->RecordJudgment(s.session_id, 1, "U");
    store->RecordJudgment(s.session_id, 2, "PNP/IV");
    CHECK_FALSE(store->NextItem(s.session_id));
    CHECK(store->FindSession(s.session_id)->done());
    CHECK_THROWS_AS(store->RecordJudgment(s.session_id, 3, "PP"), AnnotationError);
  }
}

TEST_CASE("state survives a restart") {
  auto dir = TempDir("replay");
  std::string id;
  std::vector<std::string> sample;
  {
    auto store = Store(dir);
    Session s = store->CreateSession(4, "alice", 5);
    id = s.session_id;
    sample = s.sample;
    store->RecordJudgment(id, 0, "PP");
    store->RecordJudgment(id, 1, "NP/IV");
  }
  auto store = Store(dir);
  auto s = store->FindSession(id);
  REQUIRE(s);
  CHECK(s->sample == sample);
  CHECK(s->cursor == 2);
  CHECK(store->NextItem(id)->position == 2);
  auto log = ReadJudgmentLog(store->judgments_path());
  REQUIRE(log.size() == 2);
  CHECK(log[1].category == Category::kNpIv);
  CHECK(log[1].clip_id == sample[1]);
  CHECK(log[1].timestamp == "2026-01-01T00:00:00Z");
  CHECK(store->CreateSession(1, "bob", 1).session_id == "s0002");
  CHECK(ReadJudgmentLog(dir / "nothing.jsonl").empty());
}

TEST_CASE("estimates pool judgments") {
  SUBCASE("table-like tallies") {
    // 158 PP, 7 PNP/IV, 4 PNP/OOV, 26 NP/IV, 100 NP/OOV, 5 U
    std::vector<Judgment> js;
    const std::array<std::size_t, kNumCategories> counts = {158, 7, 4, 26, 100, 5};
    std::size_t pos = 0;
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      for (std::size_t k = 0; k < counts[c]; ++k) {
        js.push_back({"s0001", pos++, "1", static_cast<Category>(c), ""});
      }
    }
    auto r = EstimateFromJudgments(js);
    CHECK(r.counts == counts);
    CHECK(r.table.n == 300);
    auto direct = NoiseBreakdown(JudgmentTable::FromCounts(counts));
    CHECK(r.estimate.pnp_incorrect.rate == direct.pnp_incorrect.rate);
    CHECK(r.estimate.pnp_correct.rate == direct.pnp_correct.rate);
    CHECK(r.estimate.oov_share == direct.oov_share);
    CHECK(r.estimate.pnp_correct.rate == doctest::Approx(126.0 / 295));
    auto j = json::parse(EstimateToJson(r));
    CHECK(j.at("counts").at("NP/OOV") == 100);
    CHECK(j.at("proportions").at("PP").get<double>() == doctest::Approx(158.0 / 300));
    CHECK(j.at("noise_rate_pnp_incorrect").at("rate").get<double>() ==
          direct.pnp_incorrect.rate);
    CHECK(j.at("n_decided") == 295);
  }
  SUBCASE("all present and predominant") {
    std::vector<Judgment> js(20, Judgment{"s0001", 0, "1", Category::kPP, ""});
    auto r = EstimateFromJudgments(js);
    CHECK(r.estimate.pnp_incorrect.rate == 0.0);
    CHECK(r.estimate.pnp_correct.rate == 0.0);
  }
  SUBCASE("nothing decided") {
    CHECK_THROWS_AS(EstimateFromJudgments({}), AnnotationError);
    CHECK_THROWS_AS(EstimateFromJudgments({{"s0001", 0, "1", Category::kUnsure, ""}}),
                    AnnotationError);
  }
}

struct Running {
  Running(AnnotationStore& store, ServerOptions options) : server(store, std::move(options)) {
    port = server.Bind("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.ListenAfterBind(); });
    server.WaitUntilReady();
  }
  ~Running() {
    server.Stop();
    thread.join();
  }
  AnnotationServer server;
  int port = 0;
  std::thread thread;
};

TEST_CASE("scripted session of one hundred judgments over HTTP") {
  auto dir = TempDir("http");
  std::filesystem::create_directories(dir / "audio");
  WriteFile(dir / "audio" / "101.wav", EncodePcmWav(1, 44100, 16, 44100));
  auto store = Store(dir / "state");
  Running running(*store, {dir / "audio", {}, ""});
  httplib::Client client("127.0.0.1", running.port);

  auto created = client.Post("/sessions", R"({"annotator_id":"alice","sample_size":100,"seed":3})",
                             "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string id = json::parse(created->body).at("session_id");

  std::mt19937 gen(12);
  std::vector<Category> script;
  for (int i = 0; i < 100; ++i) script.push_back(static_cast<Category>(gen() % kNumCategories));
  for (std::size_t i = 0; i < script.size(); ++i) {
    auto next = client.Get("/sessions/" + id + "/next");
    REQUIRE(next);
    REQUIRE(next->status == 200);
    auto item = json::parse(next->body);
    REQUIRE(item.at("position") == i);
    REQUIRE(item.at("references").size() == 3);
    json body = {{"position", i}, {"category", CategoryName(script[i])}};
    auto ack = client.Post("/sessions/" + id + "/judgments", body.dump(), "application/json");
    REQUIRE(ack);
    REQUIRE(ack->status == 200);
    REQUIRE(json::parse(ack->body).at("cursor") == i + 1);
  }
  auto done = json::parse(client.Get("/sessions/" + id + "/next")->body);
  CHECK(done.at("done") == true);
  auto session = json::parse(client.Get("/sessions/" + id)->body);
  CHECK(session.at("cursor") == 100);
  CHECK(ReadJudgmentLog(store->judgments_path()).size() == 100);

  auto estimate = client.Get("/estimate");
  REQUIRE(estimate);
  REQUIRE(estimate->status == 200);
  auto e = json::parse(estimate->body);
  const auto tally = Tally(script);
  const auto direct = NoiseBreakdown(JudgmentTable::FromCounts(tally));
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    const std::string name(CategoryName(static_cast<Category>(c)));
    CHECK(e.at("counts").at(name) == tally[c]);
    CHECK(e.at("proportions").at(name).get<double>() == static_cast<double>(tally[c]) / 100.0);
  }
  CHECK(e.at("noise_rate_pnp_incorrect").at("rate").get<double>() == direct.pnp_incorrect.rate);
  CHECK(e.at("noise_rate_pnp_correct").at("half_width").get<double>() ==
        direct.pnp_correct.half_width);
  CHECK(e.at("oov_share").get<double>() == direct.oov_share);

  // error mapping
  CHECK(client.Get("/sessions/s0404")->status == 404);
  CHECK(client.Post("/sessions/" + id + "/judgments", R"({"position":0,"category":"NP/IV"})",
                    "application/json")
            ->status == (script[0] == Category::kNpIv ? 200 : 409));
  CHECK(client.Post("/sessions/" + id + "/judgments", R"({"position":100,"category":"Nope"})",
                    "application/json")
            ->status == 400);
  CHECK(client.Post("/sessions", "{not json", "application/json")->status == 400);
  auto audio = client.Get("/audio/101.wav");
  REQUIRE(audio);
  CHECK(audio->status == 200);
  CHECK(VerifyAudioBytes(audio->body).ok());
}

TEST_CASE("empty estimate over HTTP") {
  auto dir = TempDir("empty");
  auto store = Store(dir);
  Running running(*store, {dir, {}, ""});
  httplib::Client client("127.0.0.1", running.port);
  CHECK(client.Get("/estimate")->status == 409);
}

TEST_CASE("shared token") {
  auto dir = TempDir("token");
  auto store = Store(dir);
  Running running(*store, {dir, {}, "opensesame"});
  httplib::Client client("127.0.0.1", running.port);
  const std::string body = R"({"annotator_id":"a","sample_size":2,"seed":1})";
  CHECK(client.Post("/sessions", body, "application/json")->status == 401);
  CHECK(client.Post("/sessions", {{"X-Annotation-Token", "wrong"}}, body, "application/json")
            ->status == 401);
  CHECK(client.Post("/sessions", {{"X-Annotation-Token", "opensesame"}}, body,
                    "application/json")
            ->status == 201);
  CHECK(client.Get("/sessions/s0001", {{"Authorization", "Bearer opensesame"}})->status == 200);
  CHECK(client.Get("/sessions/s0001?token=opensesame")->status == 200);
}

}  // namespace
}  // namespace clipcurate
