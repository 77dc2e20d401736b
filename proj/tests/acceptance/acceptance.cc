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

// Acceptance checks. Prints one PASS, FAIL or SKIP line per criterion and
// exits non-zero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "clipcurate/clip_record.h"
#include "clipcurate/curation.h"
#include "clipcurate/freesound_client.h"
#include "clipcurate/noise_lab.h"
#include "clipcurate/ontology.h"
#include "clipcurate/retrieval.h"
#include "clipcurate/rng.h"
#include "clipcurate/text_pipeline.h"
#include "clipcurate/util.h"
#include "clipcurate/wav.h"
#include "common/reduction_oracle.h"
#include "common/scoring_oracle.h"

namespace clipcurate {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const std::string kFixtures = CLIPCURATE_FIXTURE_DIR;
const std::string kData = CLIPCURATE_DATA_DIR;
const std::string kCli = CLIPCURATE_CLI;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kFail;
  std::string detail;
};

Outcome Pass(std::string detail) { return {Status::kPass, std::move(detail)}; }
Outcome Fail(std::string detail) { return {Status::kFail, std::move(detail)}; }
Outcome Skip(std::string detail) { return {Status::kSkip, std::move(detail)}; }
Outcome Check(bool ok, std::string detail) {
  return {ok ? Status::kPass : Status::kFail, std::move(detail)};
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

TextPipeline BundledPipeline() {
  return TextPipeline(LemmaLexicon::Load(kData + "/lexicon_en.tsv"),
                      StopWords::Load(kData + "/stopwords_en.txt"));
}

std::vector<ClipRecord> LoadCorpus() {
  std::vector<ClipRecord> out;
  std::ifstream in(kFixtures + "/corpus_200.jsonl");
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(ClipRecordFromJson(line));
  }
  return out;
}

// Library scores agree with the brute-force oracle on the bundled corpus.
Outcome ScoringOracle() {
  Ontology o = Ontology::Load(kFixtures + "/ontology.json");
  LabelSet labels = LabelSet::Read(kFixtures + "/labels_10.txt");
  TextPipeline p = BundledPipeline();
  auto corpus = LoadCorpus();
  if (corpus.size() != 200 || labels.size() != 10) return Fail("fixture has unexpected size");

  const auto start = Clock::now();
  Labeler lab(o, labels, p);
  std::vector<std::vector<double>> scores;
  std::vector<ScoredClip> best;
  for (const auto& clip : corpus) {
    scores.push_back(lab.Scores(clip));
    best.push_back(lab.Best(clip));
  }
  const double elapsed = Seconds(start);

  double max_diff = 0.0;
  std::size_t label_mismatches = 0;
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    auto expect = oracle::Label(labels.labels(), o, p, corpus[c]);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      max_diff = std::max(max_diff, std::abs(scores[c][i] - expect.all[i].score));
    }
    max_diff = std::max(max_diff, std::abs(best[c].score - expect.best.score));
    label_mismatches += best[c].label_id != expect.best.label_id;
  }
  std::ostringstream os;
  os << "200 clips x 10 labels, max |diff| " << max_diff << ", label mismatches "
     << label_mismatches << ", scoring " << FormatFixed(elapsed, 3) << " s";
  return Check(max_diff <= 1e-12 && label_mismatches == 0 && elapsed < 1.0, os.str());
}

// Scores stay in [0, 1]; a tag document equal to a query scores 1; a document
// sharing no word with a query scores 0.
Outcome ScoreRange() {
  Ontology o = Ontology::Load(kFixtures + "/ontology.json");
  TextPipeline p = BundledPipeline();
  std::vector<std::string> ids;
  for (const auto& n : o.nodes()) ids.push_back(n.id);
  std::mt19937_64 gen(1000);
  std::size_t out_of_range = 0, not_one = 0, not_zero = 0, scored = 0;
  for (int corpus = 0; corpus < 1000; ++corpus) {
    std::shuffle(ids.begin(), ids.end(), gen);
    const std::size_t k = 2 + gen() % 9;
    LabelSet labels(std::vector<std::string>(ids.begin(), ids.begin() + k));
    Labeler lab(o, labels, p);
    const auto& vocab = lab.vocabulary().words();
    for (int clip = 0; clip < 20; ++clip) {
      Document tags{{}, DocumentOrigin::kTags}, desc{{}, DocumentOrigin::kDescription};
      for (int w = gen() % 8; w > 0; --w) tags.words.push_back(vocab[gen() % vocab.size()]);
      for (int w = gen() % 12; w > 0; --w) {
        desc.words.push_back(gen() % 3 ? vocab[gen() % vocab.size()] : "zz" + std::to_string(w));
      }
      for (double s : lab.Scores(tags, desc)) {
        ++scored;
        out_of_range += !(s >= 0.0 && s <= 1.0);
      }
    }
    for (std::size_t q = 0; q < lab.queries().size(); ++q) {
      const Query& query = lab.queries()[q];
      Document same{query.words.words, DocumentOrigin::kTags};
      Document empty{{}, DocumentOrigin::kDescription};
      not_one += lab.Scores(same, empty)[q] != 1.0;
      std::set<std::string> in_query(query.words.words.begin(), query.words.words.end());
      Document other{{}, DocumentOrigin::kTags};
      for (const auto& w : vocab) {
        if (!in_query.count(w)) other.words.push_back(w);
      }
      other.words.push_back("unrelatedword");
      not_zero += lab.Scores(other, empty)[q] != 0.0;
    }
  }
  std::ostringstream os;
  os << "1000 corpora, " << scored << " scores, outside [0,1] " << out_of_range
     << ", identical != 1: " << not_one << ", disjoint != 0: " << not_zero;
  return Check(out_of_range == 0 && not_one == 0 && not_zero == 0, os.str());
}

Outcome ListeningTable() {
  // PP, PNP/IV, PNP/OOV, NP/IV, NP/OOV, U
  const std::array<double, kNumCategories> table = {0.527, 0.023, 0.013, 0.087, 0.333, 0.010};
  const NoiseEstimate est = NoiseBreakdown(JudgmentTable::FromProportions(table, 300, 0.01));
  const double correct = est.pnp_correct.rate * 100, oov = est.oov_share * 100;
  const double incorrect = est.pnp_incorrect.rate * 100;
  std::ostringstream os;
  os << "PNP correct " << FormatFixed(correct, 2) << "% (42.4 +/- 0.05), OOV share "
     << FormatFixed(oov, 2) << "% (75.9 +/- 0.05), PNP incorrect " << FormatFixed(incorrect, 2)
     << "% (46.06 from the rounded table entries)";
  return Check(std::abs(correct - 42.4) <= 0.05 && std::abs(oov - 75.9) <= 0.05 &&
                   std::abs(incorrect - 46.06) <= 0.005,
               os.str());
}

Outcome ConfidenceInterval() {
  const double h = ConfidenceHalfWidth(1.0 / 3.0, 300);
  return Check(std::abs(h - 0.0533) <= 1e-4, "p=1/3, n=300: half-width " + FormatFixed(h, 5));
}

DatasetManifest Classes(std::size_t k, std::size_t per_class, std::size_t first_id,
                        const std::string& name, bool eval_splits) {
  DatasetManifest m;
  m.name = name;
  std::size_t id = first_id;
  for (std::size_t c = 0; c < k; ++c) {
    const std::string label = "/x/" + std::to_string(100 + c);
    for (std::size_t i = 0; i < per_class + c % 3; ++i) {
      m.entries.push_back({std::to_string(id++), label, "class " + label, Split::kTrain});
    }
    if (!eval_splits) continue;
    for (Split s : {Split::kVal, Split::kTest}) {
      m.entries.push_back({std::to_string(id++), label, "class " + label, s});
    }
  }
  return m;
}

// Substitution mixing over the rho grid.
Outcome NoiseRateScaling() {
  const DatasetManifest clean = Classes(70, 20, 1, "clean", true);
  const DatasetManifest noisy = Classes(70, 20, 100000, "noisy", false);
  std::set<std::string> noisy_ids;
  for (const auto& e : noisy.entries) noisy_ids.insert(e.clip_id);
  std::size_t n_train = 0;
  for (const auto& e : clean.entries) n_train += e.split == Split::kTrain;

  std::vector<std::string> problems;
  for (int i = 0; i <= 11; ++i) {
    // rho = 45 i / 1000 for i <= 10, and 0.5
    const long num = i <= 10 ? 45L * i : 500L;
    const double rho = static_cast<double>(num) / 1000.0;
    const std::size_t expected = static_cast<std::size_t>((2 * num * n_train + 1000) / 2000);
    DatasetManifest out = MixSubstitution(clean, noisy, rho, 7 + i);
    std::size_t substituted = 0;
    for (std::size_t j = 0; j < out.entries.size(); ++j) {
      if (out.entries[j].clip_id == clean.entries[j].clip_id) continue;
      ++substituted;
      if (!noisy_ids.count(out.entries[j].clip_id)) problems.push_back("foreign id");
    }
    if (substituted != expected) {
      problems.push_back("rho " + FormatFixed(rho, 3) + ": " + std::to_string(substituted) +
                         " substituted, expected " + std::to_string(expected));
    }
    if (out.Counts() != clean.Counts()) problems.push_back("counts changed");
    const double effective = out.provenance.noise->effective_noise_rate.value_or(-1);
    if (std::abs(effective - rho * 0.464) > 1e-12) problems.push_back("effective rate");
    if (num == 500 && std::abs(effective * 100 - 23.2) > 1e-9) problems.push_back("23.2% at 0.5");
  }
  if (!problems.empty()) return Fail(problems.front());
  return Pass("rho in {0, 0.045, ..., 0.45, 0.5}, N=" + std::to_string(n_train) +
              ", exact counts, effective rate rho*46.4% (23.2% at 0.5)");
}

Outcome SyntheticNoise() {
  constexpr std::size_t kK = 70;
  std::vector<std::string> ids;
  for (std::size_t c = 0; c < kK; ++c) ids.push_back("/x/" + std::to_string(100 + c));
  LabelSet classes(ids);
  DatasetManifest base;
  base.name = "base";
  for (std::size_t i = 0; i < 100 * kK; ++i) {
    base.entries.push_back({std::to_string(i + 1), ids[i % kK], "", Split::kTrain});
  }
  for (NoiseKind kind : {NoiseKind::kUniform, NoiseKind::kConditional}) {
    auto out = InjectSyntheticNoise(base, {kind, 0.45, 0.5, 99}, classes);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < base.entries.size(); ++i) {
      changed += out.entries[i].label_id != base.entries[i].label_id;
    }
    if (changed * 100 != 45 * base.entries.size()) {
      return Fail(std::string(NoiseKindName(kind)) + ": " + std::to_string(changed) +
                  " labels changed of " + std::to_string(base.entries.size()));
    }
  }

  constexpr int kDraws = 100000;
  SeededRng rng(2021);
  std::vector<double> hist(kK, 0.0);
  for (int i = 0; i < kDraws; ++i) ++hist[DrawOffset(rng, NoiseKind::kUniform, kK, 0.5)];
  if (hist[0] != 0.0) return Fail("uniform offset of zero");
  const double expect = static_cast<double>(kDraws) / (kK - 1);
  double chi2 = 0.0;
  for (std::size_t i = 1; i < kK; ++i) chi2 += (hist[i] - expect) * (hist[i] - expect) / expect;
  constexpr double kCritical = 98.028;  // chi-square quantile 0.99, 68 degrees of freedom

  const double p = 0.2;
  std::map<std::uint64_t, double> geo;
  for (int i = 0; i < kDraws; ++i) ++geo[DrawOffset(rng, NoiseKind::kConditional, kK, p)];
  double worst_sigma = 0.0;
  for (std::uint64_t n = 1; n <= 10; ++n) {
    const double pmf = std::pow(1 - p, static_cast<double>(n - 1)) * p;
    const double sigma = std::sqrt(kDraws * pmf * (1 - pmf));
    worst_sigma = std::max(worst_sigma, std::abs(geo[n] - kDraws * pmf) / sigma);
  }
  std::ostringstream os;
  os << "K=70, rho=0.45: 45% changed, none to self; uniform chi2 " << FormatFixed(chi2, 2)
     << " < " << kCritical << "; geometric p=0.2 worst bin " << FormatFixed(worst_sigma, 2)
     << " sigma";
  return Check(chi2 < kCritical && worst_sigma <= 3.0, os.str());
}

Outcome ReductionFixture() {
  Ontology o = Ontology::Load(kFixtures + "/ontology.json");
  auto gt = ParseGroundTruth(ReadFile(kFixtures + "/gt_dev.csv"),
                             ReadFile(kFixtures + "/gt_eval.csv"));
  ReductionResult r = ReduceToSingleLabel(gt, o);
  auto expect = oracle::Reduce(gt, o, {50, 10, 20});
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& e : r.entries) got.emplace(e.clip_id, e.labels.front());
  std::set<std::string> classes(r.labels.labels().begin(), r.labels.labels().end());
  const bool ok = gt.size() == 500 && classes == expect.classes && got == expect.entries &&
                  r.n_multi_label == expect.multi;
  return Check(ok, std::to_string(gt.size()) + " rows, " + std::to_string(classes.size()) +
                       " classes, " + std::to_string(got.size()) +
                       " entries, equal to the fixed-point oracle");
}

std::optional<fs::path> GroundTruthFile(const fs::path& dir, const std::string& name) {
  for (const fs::path& p : {dir / name, dir / "FSD50K.ground_truth" / name}) {
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

// Needs CLIPCURATE_FSD50K_DIR (dev.csv, eval.csv) and CLIPCURATE_ONTOLOGY;
// the pairing count also needs CLIPCURATE_METADATA_CACHE.
std::vector<std::pair<std::string, Outcome>> ReductionReal() {
  const char* dir = std::getenv("CLIPCURATE_FSD50K_DIR");
  const char* ontology_path = std::getenv("CLIPCURATE_ONTOLOGY");
  if (!dir || !ontology_path) {
    const std::string why = "set CLIPCURATE_FSD50K_DIR and CLIPCURATE_ONTOLOGY";
    return {{"fsd50k-reduction-real", Skip(why)}, {"fsd50k-pairing-real", Skip(why)}};
  }
  auto dev = GroundTruthFile(dir, "dev.csv"), eval = GroundTruthFile(dir, "eval.csv");
  if (!dev || !eval) {
    const std::string why = std::string("dev.csv/eval.csv not found under ") + dir;
    return {{"fsd50k-reduction-real", Fail(why)}, {"fsd50k-pairing-real", Skip(why)}};
  }
  std::vector<std::pair<std::string, Outcome>> out;
  const auto start = Clock::now();
  Ontology o = Ontology::Load(ontology_path);
  auto gt = ParseGroundTruth(ReadFile(*dev), ReadFile(*eval));
  ReductionResult r = ReduceToSingleLabel(gt, o);
  const double elapsed = Seconds(start);
  out.push_back({"fsd50k-reduction-real",
                 Check(r.labels.size() == 77 && elapsed < 30.0,
                       std::to_string(r.labels.size()) + " classes (expected 77) in " +
                           FormatFixed(elapsed, 1) + " s")});

  const char* cache_path = std::getenv("CLIPCURATE_METADATA_CACHE");
  if (!cache_path) {
    out.push_back({"fsd50k-pairing-real", Skip("set CLIPCURATE_METADATA_CACHE")});
    return out;
  }
  DatasetManifest clean = CleanManifest(r, o, "clean", "real ground truth");
  MetadataCache cache(cache_path);
  Labeler lab(o, r.labels, BundledPipeline());
  auto scored = lab.AssignAll(cache.Records(), kDefaultTau, 8);
  std::set<std::string> exclusion;
  for (const auto& e : gt) exclusion.insert(e.clip_id);
  CurationResult cur = CurateNoisy(scored, exclusion, clean.CountsFor(Split::kTrain), 0,
                                   kDefaultTau, o, "noisy", "metadata cache");
  auto [pc, pn] = PairManifests(clean, cur.manifest, cur.dropped_classes);
  const std::size_t paired = pc.LabelIds().size();
  out.push_back({"fsd50k-pairing-real",
                 Check(paired == 70,
                       std::to_string(paired) + " classes after pairing (expected 70)")});
  return out;
}

int Shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Q(const fs::path& p) { return "'" + p.string() + "'"; }

// Runs the fixture pipeline through the command-line tool and returns every
// manifest and scored file it wrote.
std::map<std::string, std::string> PipelineOutputs(const fs::path& out) {
  const std::string f = kFixtures + "/";
  const std::string common = " --ontology " + Q(f + "ontology.json") + " --output-dir " + Q(out) +
                             " --seed 7 > /dev/null 2>&1";
  const std::vector<std::string> steps = {
      "reduce-fsd50k --gt-dev " + Q(f + "gt_dev.csv") + " --gt-eval " + Q(f + "gt_eval.csv"),
      "label --tau 0.5 --labels " + Q(f + "labels_10.txt") + " --corpus " +
          Q(f + "corpus_200.jsonl"),
      "curate --clean " + Q(f + "clean_small.csv"),
      "inject-noise --noise-kind uniform --rho 0.45 --manifest " + Q(out / "clean.csv"),
      "inject-noise --noise-kind conditional --rho 0.45 --manifest " + Q(out / "clean.csv"),
      "mix --rho 0.5 --clean " + Q(out / "clean.csv") + " --noisy " + Q(out / "noisy.csv"),
  };
  for (const auto& step : steps) {
    if (Shell("'" + kCli + "' " + step + common) != 0) {
      throw std::runtime_error("pipeline step failed: " + step.substr(0, step.find(' ')));
    }
  }
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.is_regular_file()) files[e.path().filename().string()] = ReadFile(e.path());
  }
  return files;
}

Outcome Determinism() {
  const fs::path root = fs::temp_directory_path() / "clipcurate_acceptance_determinism";
  fs::remove_all(root);
  auto first = PipelineOutputs(root / "a");
  auto second = PipelineOutputs(root / "b");
  fs::remove_all(root);
  std::size_t manifests = 0;
  for (const auto& [name, text] : first) manifests += name.ends_with(".csv");
  if (!first.count("scored.csv") || !first.count("noisy.csv") || manifests < 7) {
    return Fail("pipeline produced too few files");
  }
  for (const auto& [name, text] : first) {
    auto it = second.find(name);
    if (it == second.end() || it->second != text) return Fail(name + " differs between runs");
  }
  if (first.size() != second.size()) return Fail("runs wrote different file sets");
  return Pass(std::to_string(first.size()) + " files (" + std::to_string(manifests) +
              " CSVs incl. scored.csv) byte-identical across two runs");
}

Outcome WavVerification() {
  struct Case {
    std::string name;
    std::string bytes;
    std::string field;  // empty when the file conforms
  };
  const std::vector<Case> cases = {
      {"mono 16-bit 44.1 kHz 1 s", EncodePcmWav(1, 44100, 16, 44100), ""},
      {"stereo", EncodePcmWav(2, 44100, 16, 44100), "channels"},
      {"8-bit", EncodePcmWav(1, 44100, 8, 44100), "bits_per_sample"},
      {"48 kHz", EncodePcmWav(1, 48000, 16, 48000), "sample_rate"},
      {"0.2 s", EncodePcmWav(1, 44100, 16, 8820), "duration"},
  };
  for (const auto& c : cases) {
    FormatReport r = VerifyAudioBytes(c.bytes);
    const bool ok = c.field.empty() ? r.ok() : (r.problems.size() == 1 && r.HasProblem(c.field));
    if (!ok) return Fail(c.name + ": " + r.Summary());
  }
  return Pass("conforming file accepted; stereo, 8-bit, 48 kHz and 0.2 s rejected");
}

int Main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"scoring-oracle", ScoringOracle},
      {"score-range", ScoreRange},
      {"listening-table", ListeningTable},
      {"confidence-interval", ConfidenceInterval},
      {"noise-rate-scaling", NoiseRateScaling},
      {"synthetic-noise", SyntheticNoise},
      {"fsd50k-reduction-fixture", ReductionFixture},
  };
  std::vector<std::pair<std::string, Outcome>> results;
  for (const auto& [name, fn] : checks) {
    try {
      results.push_back({name, fn()});
    } catch (const std::exception& e) {
      results.push_back({name, Fail(std::string("exception: ") + e.what())});
    }
  }
  try {
    for (auto& r : ReductionReal()) results.push_back(std::move(r));
  } catch (const std::exception& e) {
    results.push_back({"fsd50k-reduction-real", Fail(std::string("exception: ") + e.what())});
  }
  for (const auto& [name, fn] : std::vector<std::pair<std::string, std::function<Outcome()>>>{
           {"determinism", Determinism}, {"wav-verification", WavVerification}}) {
    try {
      results.push_back({name, fn()});
    } catch (const std::exception& e) {
      results.push_back({name, Fail(std::string("exception: ") + e.what())});
    }
  }

  int failed = 0;
  for (const auto& [name, outcome] : results) {
    const char* tag = outcome.status == Status::kPass   ? "PASS"
                      : outcome.status == Status::kSkip ? "SKIP"
                                                        : "FAIL";
    failed += outcome.status == Status::kFail;
    std::cout << tag << "  " << name << "  " << outcome.detail << "\n";
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " failed" : "acceptance: ok")
            << std::endl;
  return failed ? 1 : 0;
}

}  // namespace
}  // namespace clipcurate

int main() { return clipcurate::Main(); }
