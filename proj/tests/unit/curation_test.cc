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
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "clipcurate/ontology.h"
#include "clipcurate/util.h"
#include "common/reduction_oracle.h"
#include "doctest.h"

namespace clipcurate {
namespace {

const std::string kFixtures = CLIPCURATE_FIXTURE_DIR;

constexpr const char* kAcoustic = "/m/042v_gx";
constexpr const char* kElectric = "/m/02sgy";
constexpr const char* kBark = "/m/05tny_";
constexpr const char* kMeow = "/m/07qrkrw";
constexpr const char* kCello = "/m/01xqw";
constexpr const char* kGuitar = "/m/0342h";
constexpr const char* kClapping = "/m/0l15bq";

Ontology FixtureOntology() { return Ontology::Load(kFixtures + "/ontology.json"); }

std::vector<GroundTruthEntry> FixtureGroundTruth() {
  return ParseGroundTruth(ReadFile(kFixtures + "/gt_dev.csv"),
                          ReadFile(kFixtures + "/gt_eval.csv"));
}

TEST_CASE("ground truth parsing") {
  auto gt = FixtureGroundTruth();
  CHECK(gt.size() == 500);
  std::size_t test = std::count_if(gt.begin(), gt.end(),
                                   [](const auto& e) { return e.split == Split::kTest; });
  CHECK(test == 100);
  // labels are propagated to ancestors in the published format
  const auto& first = gt.front();
  CHECK(first.labels.size() > 1);

  auto small = ParseGroundTruth("fname,labels,mids,split\n7,\"A,B\",\"/m/a, /m/b\",val\n",
                                "fname,labels,mids\n8,C,/m/c\n");
  REQUIRE(small.size() == 2);
  CHECK(small[0] == GroundTruthEntry{"7", {"/m/a", "/m/b"}, Split::kVal});
  CHECK(small[1] == GroundTruthEntry{"8", {"/m/c"}, Split::kTest});
  CHECK_THROWS(ParseGroundTruth("fname,labels,mids,split\n7,A,,train\n", ""));
  CHECK_THROWS(ParseGroundTruth("fname,labels,mids,split\n7,A,/m/a,dev\n", ""));
  CHECK_THROWS(ParseGroundTruth("fname,labels,split\n7,A,train\n", ""));
}

TEST_CASE("most specific labels") {
  Ontology o = FixtureOntology();
  auto chain = o.Ancestors(kAcoustic);
  chain.push_back(kAcoustic);
  CHECK(MostSpecificLabels(chain, o) == std::vector<std::string>{kAcoustic});
  CHECK(MostSpecificLabels({kBark, kMeow}, o).size() == 2);
  CHECK(MostSpecificLabels({kGuitar, kAcoustic, kElectric}, o) ==
        std::vector<std::string>{kAcoustic, kElectric});
}

TEST_CASE("fixture reduction") {
  Ontology o = FixtureOntology();
  ReductionResult r = ReduceToSingleLabel(FixtureGroundTruth(), o);
  CHECK(r.labels == LabelSet({kAcoustic, kElectric, kBark}));
  CHECK(r.n_multi_label == 20);
  CHECK(r.pruned_ancestors == std::vector<std::string>{kGuitar});
  CHECK(r.below_minimum == std::vector<std::string>{kCello, kMeow, kClapping});

  DatasetManifest m = CleanManifest(r, o, "clean", "fixture");
  auto counts = m.Counts();
  CHECK(counts[kAcoustic] == SplitCounts{60, 12, 22});
  CHECK(counts[kElectric] == SplitCounts{55, 10, 20});
  CHECK(counts[kBark] == SplitCounts{70, 15, 25});
  CHECK(m.entries.size() == 289);
  CHECK(m.LabelNames().at(kBark) == "Bark");

  auto expect = oracle::Reduce(FixtureGroundTruth(), o, {50, 10, 20});
  CHECK(expect.classes ==
        std::set<std::string>(r.labels.labels().begin(), r.labels.labels().end()));
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& e : r.entries) got.emplace(e.clip_id, e.labels.front());
  CHECK(got == expect.entries);
  CHECK(expect.multi == r.n_multi_label);
}

TEST_CASE("one missing training clip removes the class") {
  Ontology o = FixtureOntology();
  std::vector<GroundTruthEntry> gt;
  int id = 0;
  auto add = [&](const char* label, int train, int val, int test) {
    for (int i = 0; i < train; ++i) gt.push_back({std::to_string(++id), {label}, Split::kTrain});
    for (int i = 0; i < val; ++i) gt.push_back({std::to_string(++id), {label}, Split::kVal});
    for (int i = 0; i < test; ++i) gt.push_back({std::to_string(++id), {label}, Split::kTest});
  };
  add(kBark, 50, 10, 20);
  add(kMeow, 49, 10, 20);
  ReductionResult r = ReduceToSingleLabel(gt, o);
  CHECK(r.labels == LabelSet({kBark}));
  CHECK(r.entries.size() == 80);
}

TEST_CASE("unknown labels are rejected") {
  Ontology o = FixtureOntology();
  CHECK_THROWS_AS(ReduceToSingleLabel({{"1", {"/m/nope"}, Split::kTrain}}, o), CurationError);
}

TEST_CASE("random ground truth matches the fixed-point oracle and is idempotent") {
  Ontology o = FixtureOntology();
  std::vector<std::string> ids;
  for (const auto& n : o.nodes()) ids.push_back(n.id);
  std::mt19937 gen(404);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<GroundTruthEntry> gt;
    const int rows = 50 + static_cast<int>(gen() % 200);
    std::vector<std::string> hot;
    for (int k = 0; k < 6; ++k) hot.push_back(ids[gen() % ids.size()]);
    for (int i = 0; i < rows; ++i) {
      GroundTruthEntry e;
      e.clip_id = std::to_string(i * 7 + 1);
      e.split = static_cast<Split>(gen() % 3);
      const int nl = 1 + static_cast<int>(gen() % 10 == 0);
      for (int k = 0; k < nl; ++k) {
        const std::string l = hot[gen() % hot.size()];
        e.labels.push_back(l);
        if (gen() % 2) {
          for (const auto& a : o.Ancestors(l)) e.labels.push_back(a);
        }
      }
      gt.push_back(e);
    }
    MinCounts min{static_cast<std::size_t>(gen() % 8), static_cast<std::size_t>(gen() % 4),
                  static_cast<std::size_t>(gen() % 5)};
    ReductionResult r = ReduceToSingleLabel(gt, o, min);
    auto expect = oracle::Reduce(gt, o, {min.train, min.val, min.test});
    REQUIRE(std::set<std::string>(r.labels.labels().begin(), r.labels.labels().end()) ==
            expect.classes);
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& e : r.entries) got.emplace(e.clip_id, e.labels.front());
    REQUIRE(got == expect.entries);
    REQUIRE(r.n_multi_label == expect.multi);

    ReductionResult again = ReduceToSingleLabel(r.entries, o, min);
    REQUIRE(again.labels == r.labels);
    REQUIRE(again.entries == r.entries);
    REQUIRE(again.n_multi_label == 0);
  }
}

std::vector<ScoredClip> Candidates(const std::string& label, int first_id, int n, double score) {
  std::vector<ScoredClip> out;
  for (int i = 0; i < n; ++i) out.push_back({std::to_string(first_id + i), label, score});
  return out;
}

TEST_CASE("exact pool size selects everything") {
  Ontology o = FixtureOntology();
  auto scored = Candidates(kBark, 100, 5, 0.9);
  CurationResult r = CurateNoisy(scored, {}, {{kBark, 5}}, 1, 0.5, o, "noisy", "test");
  CHECK(r.manifest.entries.size() == 5);
  CHECK(r.dropped_classes.empty());
  CHECK(r.manifest.provenance.seed == 1u);
  CHECK(r.manifest.provenance.tau == 0.5);
}

TEST_CASE("threshold, exclusion and dropped classes") {
  Ontology o = FixtureOntology();
  auto scored = Candidates(kBark, 100, 10, 0.9);
  auto low = Candidates(kBark, 200, 5, 0.49);
  scored.insert(scored.end(), low.begin(), low.end());
  auto meow = Candidates(kMeow, 300, 3, 0.8);
  scored.insert(scored.end(), meow.begin(), meow.end());
  auto other = Candidates(kCello, 400, 2, 0.8);  // class not in the clean set
  scored.insert(scored.end(), other.begin(), other.end());
  std::set<std::string> exclusion = {"100", "101", "102"};
  CurationResult r = CurateNoisy(scored, exclusion, {{kBark, 6}, {kMeow, 4}}, 9, 0.5, o, "n", "t");
  CHECK(r.n_scored == 20);
  CHECK(r.n_below_tau == 5);
  CHECK(r.n_excluded == 3);
  CHECK(r.n_candidates == 10);
  CHECK(r.dropped_classes == std::vector<std::string>{kMeow});
  CHECK(r.manifest.entries.size() == 6);
  for (const auto& e : r.manifest.entries) {
    CHECK(exclusion.count(e.clip_id) == 0);
    CHECK(e.label_id == kBark);
    CHECK(e.split == Split::kTrain);
    CHECK(std::stoi(e.clip_id) < 200);
  }
  CHECK(r.manifest.provenance.dropped_classes == r.dropped_classes);
  CHECK_THROWS_AS(CurateNoisy(low, {}, {{kBark, 1}}, 1, 0.5, o, "n", "t"), CurationError);
  CHECK_THROWS_AS(CurateNoisy({{"1", kBark, 1.0}, {"1", kBark, 1.0}}, {}, {{kBark, 1}}, 1, 0.5, o,
                              "n", "t"),
                  CurationError);
}

TEST_CASE("selection follows the reference generator stream") {
  Ontology o = FixtureOntology();
  auto scored = Candidates(kBark, 1000, 40, 0.9);
  auto more = Candidates(kAcoustic, 50, 25, 0.7);
  scored.insert(scored.end(), more.begin(), more.end());
  std::shuffle(scored.begin(), scored.end(), std::mt19937(1));
  const std::uint64_t seed = 20210721;
  CurationResult r = CurateNoisy(scored, {}, {{kBark, 12}, {kAcoustic, 7}}, seed, 0.5, o, "n", "t");

  // Classes in id order share one engine; each pool is sorted by numeric id
  // and drawn by partial Fisher-Yates with unbiased bounded integers.
  std::mt19937_64 engine(seed);
  auto below = [&](std::uint64_t n) {
    const unsigned __int128 two64 = static_cast<unsigned __int128>(1) << 64;
    const unsigned __int128 accept_below = two64 - two64 % n;
    std::uint64_t x;
    do {
      x = engine();
    } while (x >= accept_below);
    return x % n;
  };
  std::set<std::string> expect;
  for (auto [label, first, n, k] :
       {std::tuple{kAcoustic, 50, 25, 7}, std::tuple{kBark, 1000, 40, 12}}) {
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), first);
    for (int i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + below(n - i)]);
      expect.insert(std::to_string(pool[i]));
    }
  }
  std::set<std::string> got;
  for (const auto& e : r.manifest.entries) got.insert(e.clip_id);
  CHECK(got == expect);
}

TEST_CASE("pairing") {
  DatasetManifest clean, noisy;
  clean.name = "clean";
  noisy.name = "noisy";
  clean.entries = {{"1", "a", "A", Split::kTrain}, {"2", "a", "A", Split::kTrain},
                   {"3", "b", "B", Split::kTrain}, {"4", "a", "A", Split::kVal},
                   {"5", "b", "B", Split::kTest}};
  noisy.entries = {{"11", "a", "A", Split::kTrain}, {"12", "a", "A", Split::kTrain},
                   {"13", "b", "B", Split::kTrain}};

  auto [c0, n0] = PairManifests(clean, noisy, {});
  CHECK(c0.entries == clean.entries);
  CHECK(n0.entries == noisy.entries);
  CHECK(c0.provenance.paired_with == "noisy");
  CHECK(n0.provenance.paired_with == "clean");
  CHECK(n0.provenance.eval_splits_from == "clean");

  auto [c1, n1] = PairManifests(clean, noisy, {"b"});
  CHECK(c1.entries.size() == 3);
  CHECK(n1.entries.size() == 2);
  for (const auto& e : c1.entries) CHECK(e.label_id == "a");
  for (const auto& e : n1.entries) CHECK(e.label_id == "a");
  CHECK(c1.provenance.dropped_classes == std::vector<std::string>{"b"});

  noisy.entries.pop_back();
  try {
    PairManifests(clean, noisy, {});
    FAIL("expected a pairing error");
  } catch (const PairingError& e) {
    CHECK(e.class_id() == "b");
  }
}

TEST_CASE("fixture pairing keeps training counts equal") {
  Ontology o = FixtureOntology();
  DatasetManifest clean = CleanManifest(ReduceToSingleLabel(FixtureGroundTruth(), o), o, "c", "f");
  std::vector<ScoredClip> scored;
  int id = 900000;
  for (const auto& [label, n] : clean.CountsFor(Split::kTrain)) {
    // one class is short of candidates and must be dropped
    const int have = label == kElectric ? static_cast<int>(n) - 1 : static_cast<int>(n) + 5;
    auto c = Candidates(label, id, have, 0.75);
    scored.insert(scored.end(), c.begin(), c.end());
    id += 1000;
  }
  std::set<std::string> excl;
  for (const auto& e : clean.entries) excl.insert(e.clip_id);
  CurationResult r = CurateNoisy(scored, excl, clean.CountsFor(Split::kTrain), 3, 0.5, o, "n", "s");
  CHECK(r.dropped_classes == std::vector<std::string>{kElectric});
  auto [pc, pn] = PairManifests(clean, r.manifest, r.dropped_classes);
  // independent tally
  std::map<std::string, int> tc, tn;
  for (const auto& e : pc.entries) {
    if (e.split == Split::kTrain) ++tc[e.label_id];
  }
  for (const auto& e : pn.entries) ++tn[e.label_id];
  CHECK(tc == tn);
  CHECK(tc.size() == 2);
  for (const auto& e : pn.entries) CHECK(excl.count(e.clip_id) == 0);
}

}  // namespace
}  // namespace clipcurate
