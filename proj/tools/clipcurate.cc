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

// clipcurate command-line driver.
//
// Settings come from three layers, later ones winning: built-in defaults, the
// YAML file given by --config, then command-line flags (including --set
// key=value). Keys are dotted paths into the YAML tree, e.g. paths.lexicon.

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clipcurate/annotation_service.h"
#include "clipcurate/clip_record.h"
#include "clipcurate/csv.h"
#include "clipcurate/curation.h"
#include "clipcurate/freesound_client.h"
#include "clipcurate/manifest.h"
#include "clipcurate/noise_lab.h"
#include "clipcurate/ontology.h"
#include "clipcurate/retrieval.h"
#include "clipcurate/text_pipeline.h"
#include "clipcurate/util.h"
#include "json.hpp"

#ifndef CLIPCURATE_DATA_DIR
#define CLIPCURATE_DATA_DIR "data"
#endif

namespace clipcurate {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

constexpr const char* kAnnotationTokenEnvVar = "CLIPCURATE_ANNOTATION_TOKEN";

const std::map<std::string, std::string>& Defaults() {
  static const std::map<std::string, std::string> kDefaults = {
      {"paths.lexicon", std::string(CLIPCURATE_DATA_DIR) + "/lexicon_en.tsv"},
      {"paths.stop_words", std::string(CLIPCURATE_DATA_DIR) + "/stopwords_en.txt"},
      {"paths.output_dir", "out"},
      {"tau", "0.5"},
      {"seed", "0"},
      {"threads", "4"},
      {"names.clean", "clean"},
      {"names.noisy", "noisy"},
      {"noise.kind", "uniform"},
      {"noise.rho", "0"},
      {"noise.geometric_p", "0.5"},
      {"noise.reference_rate", "0.464"},
      {"credentials_env", kCredentialsEnvVar},
      {"freesound.base_url", "https://freesound.org"},
      {"freesound.auth_scheme", "Token"},
      {"freesound.query", ""},
      {"freesound.page_size", "150"},
      {"freesound.requests_per_second", "1"},
      {"freesound.max_retries", "5"},
      {"freesound.initial_backoff_ms", "1000"},
      {"freesound.concurrency", "4"},
      {"freesound.min_duration", "0.3"},
      {"freesound.max_duration", "30"},
      {"serve.host", "127.0.0.1"},
      {"serve.port", "8080"},
  };
  return kDefaults;
}

bool LooksLikeSecret(const std::string& key) {
  for (const char* word : {"token", "api_key", "apikey", "password", "secret"}) {
    if (key.find(word) != std::string::npos) return true;
  }
  return false;
}

class Settings {
 public:
  Settings() : values_(Defaults()) {}

  void LoadYaml(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("config", "config file not found: " + path.string());
    YAML::Node root;
    try {
      root = YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
      throw ConfigError("config", "cannot parse " + path.string() + ": " + e.what());
    }
    base_dir_ = path.parent_path();
    Flatten(root, "");
  }

  void Set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::optional<std::string> Get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string Require(const std::string& key) const {
    auto v = Get(key);
    if (!v || v->empty()) throw ConfigError(key, key + " is required");
    return *v;
  }

  fs::path Path(const std::string& key) const { return Resolve(key, Require(key)); }

  std::optional<fs::path> OptionalPath(const std::string& key) const {
    auto v = Get(key);
    if (!v || v->empty()) return std::nullopt;
    return Resolve(key, *v);
  }

  fs::path File(const std::string& key) const {
    fs::path p = Path(key);
    if (!fs::is_regular_file(p)) throw ConfigError(key, key + ": file not found: " + p.string());
    return p;
  }

  double Double(const std::string& key) const {
    const std::string v = Require(key);
    try {
      std::size_t used = 0;
      double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(key, key + ": not a number: '" + v + "'");
    }
  }

  std::uint64_t Uint(const std::string& key) const {
    const std::string v = Require(key);
    try {
      std::size_t used = 0;
      if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
      unsigned long long u = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return u;
    } catch (const std::exception&) {
      throw ConfigError(key, key + ": not a non-negative integer: '" + v + "'");
    }
  }

 private:
  fs::path Resolve(const std::string& key, const std::string& value) const {
    fs::path p(value);
    if (p.is_relative() && yaml_keys_.count(key) && flag_free(key)) p = base_dir_ / p;
    return p;
  }
  bool flag_free(const std::string& key) const { return !flag_keys.count(key); }

  void Flatten(const YAML::Node& node, const std::string& prefix) {
    if (node.IsMap()) {
      for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        Flatten(kv.second, prefix.empty() ? key : prefix + "." + key);
      }
    } else if (node.IsScalar()) {
      if (LooksLikeSecret(prefix)) {
        throw ConfigError(prefix, "credentials must not appear in the config file; set the " +
                                      Get("credentials_env").value_or(kCredentialsEnvVar) +
                                      " environment variable instead");
      }
      values_[prefix] = node.as<std::string>();
      yaml_keys_.insert(prefix);
    } else if (node.IsNull()) {
      values_[prefix] = "";
    } else {
      throw ConfigError(prefix, prefix + ": lists are not supported here");
    }
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> yaml_keys_;
  fs::path base_dir_;

 public:
  std::set<std::string> flag_keys;
};

struct Run {
  std::string subcommand;
  const Settings& settings;
  json input_digests = json::object();
  json counts = json::object();
  json dropped = json::array();
  json outputs = json::array();

  fs::path Input(const std::string& key) {
    fs::path p = settings.File(key);
    input_digests[key] = {{"path", p.string()}, {"sha256", Sha256FileHex(p)}};
    return p;
  }
  // Input file from key, or fallback when the key is unset.
  fs::path InputOr(const std::string& key, const fs::path& fallback) {
    if (auto v = settings.Get(key); v && !v->empty()) return Input(key);
    if (!fs::is_regular_file(fallback)) {
      throw ConfigError(key, key + " is required (default " + fallback.string() + " not found)");
    }
    input_digests[key] = {{"path", fallback.string()}, {"sha256", Sha256FileHex(fallback)}};
    return fallback;
  }
  fs::path OutputDir() const { return settings.Path("paths.output_dir"); }
  void Emitted(const fs::path& p) { outputs.push_back(p.string()); }
};

double Tau(const Settings& s) {
  const double tau = s.Double("tau");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau", "tau must be in [0, 1]");
  return tau;
}

TextPipeline LoadPipeline(Run& run) {
  return TextPipeline(LemmaLexicon::Load(run.Input("paths.lexicon")),
                      StopWords::Load(run.Input("paths.stop_words")));
}

void EmitAndRecord(Run& run, const DatasetManifest& m, const fs::path& csv) {
  EmitManifest(m, csv);
  run.Emitted(csv);
  run.Emitted(SidecarPath(csv));
}

json SplitTotals(const DatasetManifest& m) {
  SplitCounts totals{};
  for (const auto& [label, c] : m.Counts()) {
    for (std::size_t i = 0; i < 3; ++i) totals[i] += c[i];
  }
  return {{"classes", m.LabelIds().size()},
          {"entries", m.entries.size()},
          {"train", totals[0]},
          {"val", totals[1]},
          {"test", totals[2]}};
}

void ReduceFsd50k(Run& run) {
  const auto& s = run.settings;
  Ontology ontology = Ontology::Load(run.Input("paths.ontology"));
  auto gt = ParseGroundTruth(ReadFile(run.Input("paths.ground_truth_dev")),
                             ReadFile(run.Input("paths.ground_truth_eval")));
  ReductionResult red = ReduceToSingleLabel(gt, ontology);
  const std::string name = s.Require("names.clean") + "-full";
  DatasetManifest m = CleanManifest(red, ontology, name, "single-label reduction of " +
                                    s.Path("paths.ground_truth_dev").filename().string() +
                                    " + " +
                                    s.Path("paths.ground_truth_eval").filename().string());
  EmitAndRecord(run, m, run.OutputDir() / (name + ".csv"));
  const fs::path labels = run.OutputDir() / "labels.txt";
  WriteFile(labels, red.labels.ToText());
  run.Emitted(labels);
  run.counts = SplitTotals(m);
  run.counts["ground_truth"] = gt.size();
  run.counts["multi_label_dropped"] = red.n_multi_label;
  std::vector<std::string> dropped = red.pruned_ancestors;
  dropped.insert(dropped.end(), red.below_minimum.begin(), red.below_minimum.end());
  std::sort(dropped.begin(), dropped.end());
  run.dropped = dropped;
  run.counts["pruned_ancestors"] = red.pruned_ancestors.size();
  run.counts["below_minimum"] = red.below_minimum.size();
}

ClientConfig FreesoundConfig(const Settings& s, bool need_token) {
  ClientConfig c;
  c.base_url = s.Require("freesound.base_url");
  c.auth_scheme = s.Require("freesound.auth_scheme");
  c.query = s.Get("freesound.query").value_or("");
  c.page_size = static_cast<int>(s.Uint("freesound.page_size"));
  if (auto v = s.Get("freesound.max_pages"); v && !v->empty()) {
    c.max_pages = static_cast<int>(s.Uint("freesound.max_pages"));
  }
  c.requests_per_second = s.Double("freesound.requests_per_second");
  if (!(c.requests_per_second > 0.0)) {
    throw ConfigError("freesound.requests_per_second", "request rate must be positive");
  }
  c.max_retries = static_cast<int>(s.Uint("freesound.max_retries"));
  c.initial_backoff = std::chrono::milliseconds(s.Uint("freesound.initial_backoff_ms"));
  c.window.min_seconds = s.Double("freesound.min_duration");
  c.window.max_seconds = s.Double("freesound.max_duration");
  c.format.min_duration = c.window.min_seconds;
  c.format.max_duration = c.window.max_seconds;
  if (auto v = s.Get("converter"); v && !v->empty()) c.converter = *v;
  const std::string env = s.Require("credentials_env");
  const char* token = std::getenv(env.c_str());
  if (token && *token) {
    c.token = token;
  } else if (need_token) {
    throw ConfigError("credentials_env", "environment variable " + env + " is not set");
  }
  return c;
}

void FetchMetadataCmd(Run& run) {
  const auto& s = run.settings;
  FreesoundClient client(FreesoundConfig(s, true));
  MetadataCache cache(s.Path("paths.metadata_cache"));
  FetchReport r = client.FetchMetadata(cache);
  run.counts = {{"first_page", r.first_page},
                {"pages_requested", r.pages_requested},
                {"pages_malformed", r.pages_malformed},
                {"records_seen", r.records_seen},
                {"records_filtered", r.records_filtered},
                {"records_stored", r.records_stored},
                {"throttled", r.throttled},
                {"complete", r.complete},
                {"cache_size", cache.size()},
                {"next_page", cache.next_page()}};
  run.Emitted(cache.path());
}

void DownloadCmd(Run& run) {
  const auto& s = run.settings;
  FreesoundClient client(FreesoundConfig(s, true));
  MetadataCache cache(run.Input("paths.metadata_cache"));
  std::vector<ClipRecord> records = cache.Records();
  if (s.Get("inputs.manifest")) {
    DatasetManifest m = ReadManifest(run.Input("inputs.manifest"));
    std::set<std::string> wanted;
    for (const auto& e : m.entries) wanted.insert(e.clip_id);
    std::erase_if(records, [&](const ClipRecord& r) { return !wanted.count(r.clip_id); });
  }
  const fs::path dest = s.Path("paths.audio_dir");
  auto results = client.DownloadAll(records, dest,
                                    static_cast<unsigned>(s.Uint("freesound.concurrency")));
  std::map<std::string, std::size_t> by_status;
  for (const auto& r : results) ++by_status[std::string(DownloadStatusName(r.status))];
  run.counts = {{"clips", records.size()}, {"status", by_status}};
  run.Emitted(dest / "download_log.jsonl");
}

void LabelCmd(Run& run) {
  const auto& s = run.settings;
  Ontology ontology = Ontology::Load(run.Input("paths.ontology"));
  LabelSet labels = LabelSet::Read(run.Input("paths.labels"));
  const std::string corpus_key = s.Get("inputs.corpus") ? "inputs.corpus" : "paths.metadata_cache";
  MetadataCache corpus(run.Input(corpus_key));
  if (corpus.malformed_lines() > 0) {
    LogWarning(std::to_string(corpus.malformed_lines()) + " malformed corpus lines skipped");
  }
  const double tau = Tau(s);
  Labeler labeler(ontology, labels, LoadPipeline(run));
  auto records = corpus.Records();
  auto scored = labeler.AssignAll(records, tau, static_cast<unsigned>(s.Uint("threads")));
  const fs::path out = run.OutputDir() / "scored.csv";
  WriteFile(out, ScoredCsv(scored));
  run.Emitted(out);
  std::map<std::string, std::size_t> per_label;
  for (const auto& c : scored) ++per_label[c.label_id];
  run.counts = {{"clips", records.size()},
                {"retrieved", scored.size()},
                {"below_tau", records.size() - scored.size()},
                {"vocabulary", labeler.vocabulary().size()},
                {"per_label", per_label}};
}

void CurateCmd(Run& run) {
  const auto& s = run.settings;
  Ontology ontology = Ontology::Load(run.Input("paths.ontology"));
  const fs::path scored_path = run.InputOr("inputs.scored", run.OutputDir() / "scored.csv");
  const fs::path clean_path = run.InputOr(
      "inputs.clean_manifest", run.OutputDir() / (s.Require("names.clean") + "-full.csv"));
  auto scored = ParseScoredCsv(ReadFile(scored_path));
  DatasetManifest clean = ReadManifest(clean_path);

  std::set<std::string> exclusion;
  for (const auto& e : clean.entries) exclusion.insert(e.clip_id);
  if (s.Get("paths.ground_truth_dev") && s.Get("paths.ground_truth_eval")) {
    auto gt = ParseGroundTruth(ReadFile(run.Input("paths.ground_truth_dev")),
                               ReadFile(run.Input("paths.ground_truth_eval")));
    for (const auto& e : gt) exclusion.insert(e.clip_id);
  }

  const double tau = Tau(s);
  const std::uint64_t seed = s.Uint("seed");
  CurationResult result =
      CurateNoisy(scored, exclusion, clean.CountsFor(Split::kTrain), seed, tau, ontology,
                  s.Require("names.noisy"), "relevance-scored clips from " +
                                                scored_path.filename().string());
  clean.name = s.Require("names.clean");
  auto [paired_clean, paired_noisy] =
      PairManifests(std::move(clean), std::move(result.manifest), result.dropped_classes);
  EmitAndRecord(run, paired_clean, run.OutputDir() / (paired_clean.name + ".csv"));
  EmitAndRecord(run, paired_noisy, run.OutputDir() / (paired_noisy.name + ".csv"));
  run.dropped = result.dropped_classes;
  run.counts = {{"scored", result.n_scored},
                {"below_tau", result.n_below_tau},
                {"excluded", result.n_excluded},
                {"candidates", result.n_candidates},
                {"clean", SplitTotals(paired_clean)},
                {"noisy", SplitTotals(paired_noisy)}};
}

NoiseSpec NoiseFromSettings(const Settings& s) {
  NoiseSpec spec;
  try {
    spec.kind = ParseNoiseKind(s.Require("noise.kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("noise.kind", e.what());
  }
  spec.rho = s.Double("noise.rho");
  spec.p_geometric = s.Double("noise.geometric_p");
  spec.seed = s.Get("noise.seed") && !s.Get("noise.seed")->empty() ? s.Uint("noise.seed")
                                                                     : s.Uint("seed");
  try {
    spec.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("noise", e.what());
  }
  return spec;
}

void InjectNoiseCmd(Run& run) {
  const auto& s = run.settings;
  NoiseSpec spec = NoiseFromSettings(s);
  if (spec.kind == NoiseKind::kSubstitution) {
    throw ConfigError("noise.kind", "substitution noise is produced by the mix subcommand");
  }
  DatasetManifest m = ReadManifest(run.Input("inputs.manifest"));
  LabelSet classes = s.Get("paths.labels") ? LabelSet::Read(run.Input("paths.labels"))
                                           : LabelSet(m.LabelIds());
  std::optional<Ontology> ontology;
  if (s.Get("paths.ontology")) ontology = Ontology::Load(run.Input("paths.ontology"));
  DatasetManifest noisy = InjectSyntheticNoise(m, spec, classes, ontology ? &*ontology : nullptr);
  EmitAndRecord(run, noisy, run.OutputDir() / (noisy.name + ".csv"));
  run.counts = SplitTotals(noisy);
  run.counts["n_train"] = noisy.provenance.noise->n_train;
  run.counts["n_changed"] = noisy.provenance.noise->n_changed;
}

void MixCmd(Run& run) {
  const auto& s = run.settings;
  NoiseSpec spec = NoiseFromSettings(s);
  DatasetManifest clean = ReadManifest(
      run.InputOr("inputs.clean_manifest", run.OutputDir() / (s.Require("names.clean") + ".csv")));
  DatasetManifest noisy = ReadManifest(
      run.InputOr("inputs.noisy_manifest", run.OutputDir() / (s.Require("names.noisy") + ".csv")));
  DatasetManifest mixed =
      MixSubstitution(clean, noisy, spec.rho, spec.seed, s.Double("noise.reference_rate"));
  EmitAndRecord(run, mixed, run.OutputDir() / (mixed.name + ".csv"));
  run.counts = SplitTotals(mixed);
  run.counts["n_train"] = mixed.provenance.noise->n_train;
  run.counts["n_changed"] = mixed.provenance.noise->n_changed;
}

void EvaluateCmd(Run& run) {
  const auto& s = run.settings;
  auto scored = ParseScoredCsv(
      ReadFile(run.InputOr("inputs.scored", run.OutputDir() / "scored.csv")));
  CsvTable truth(ReadFile(run.Input("inputs.truth")));
  const std::size_t id_col = truth.column("clip_id");
  const std::size_t label_col = truth.column("label_id");
  std::map<std::string, std::string> gt;
  for (const auto& row : truth.rows()) gt[row[id_col]] = row[label_col];
  EvaluationReport report = EvaluateLabels(scored, gt, Tau(s));
  const fs::path out = run.OutputDir() / "evaluation.json";
  WriteFile(out, report.ToJson() + "\n");
  run.Emitted(out);
  run.counts = {{"ground_truth", report.n_ground_truth},
                {"retrieved", report.n_retrieved},
                {"correct", report.n_correct},
                {"classes_above", report.n_classes_above},
                {"classes_below", report.n_classes_below},
                {"classes_unretrieved", report.n_classes_unretrieved}};
}

fs::path StateDir(const Run& run) {
  if (auto p = run.settings.OptionalPath("paths.state_dir")) return *p;
  return run.OutputDir() / "annotations";
}

AnnotationStore OpenStore(Run& run) {
  const auto& s = run.settings;
  DatasetManifest audited = ReadManifest(run.Input("inputs.manifest"));
  DatasetManifest clean = ReadManifest(
      run.InputOr("inputs.clean_manifest", run.OutputDir() / (s.Require("names.clean") + ".csv")));
  return AnnotationStore(std::move(audited), std::move(clean),
                         Ontology::Load(run.Input("paths.ontology")), StateDir(run));
}

void ServeCmd(Run& run) {
  const auto& s = run.settings;
  AnnotationStore store = OpenStore(run);
  ServerOptions options;
  options.audio_dir = s.Path("paths.audio_dir");
  if (auto p = s.OptionalPath("paths.static_dir")) options.static_dir = *p;
  if (const char* token = std::getenv(kAnnotationTokenEnvVar)) options.token = token;
  if (options.token.empty()) {
    LogWarning(std::string(kAnnotationTokenEnvVar) + " is not set; the API accepts any client");
  }
  AnnotationServer server(store, options);
  const std::string host = s.Require("serve.host");
  const int port = static_cast<int>(s.Uint("serve.port"));
  std::cerr << "serving " << store.Sessions().size() << " sessions on http://" << host << ":"
            << port << "\n";
  if (!server.Listen(host, port)) {
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  }
  run.counts = {{"sessions", store.Sessions().size()}, {"judgments", store.Judgments().size()}};
}

void EstimateCmd(Run& run) {
  const fs::path log = StateDir(run) / "judgments.jsonl";
  if (!fs::is_regular_file(log)) {
    throw ConfigError("paths.state_dir", "no judgment log at " + log.string());
  }
  run.input_digests["judgments"] = {{"path", log.string()}, {"sha256", Sha256FileHex(log)}};
  EstimateResult r = EstimateFromJudgments(ReadJudgmentLog(log));
  const fs::path out = run.OutputDir() / "estimate.json";
  WriteFile(out, json::parse(EstimateToJson(r)).dump(2) + "\n");
  run.Emitted(out);
  run.counts = json::parse(EstimateToJson(r));
}

void PrintError(const std::string& category, const std::string& message,
                const std::string& field = "") {
  json err = {{"error", category}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  std::cerr << err.dump() << std::endl;
}

struct FlagBinding {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagBinding kFlags[] = {
    {"--ontology", "paths.ontology", "ontology JSON"},
    {"--lexicon", "paths.lexicon", "lemma lexicon TSV"},
    {"--stop-words", "paths.stop_words", "stop word list"},
    {"--labels", "paths.labels", "label set file, one id per line"},
    {"--gt-dev", "paths.ground_truth_dev", "development ground truth CSV"},
    {"--gt-eval", "paths.ground_truth_eval", "evaluation ground truth CSV"},
    {"--cache", "paths.metadata_cache", "metadata cache (JSONL)"},
    {"--output-dir", "paths.output_dir", "output directory"},
    {"--audio-dir", "paths.audio_dir", "directory of converted WAV files"},
    {"--state-dir", "paths.state_dir", "annotation state directory"},
    {"--static-dir", "paths.static_dir", "annotation UI bundle"},
    {"--corpus", "inputs.corpus", "clip records (JSONL) to label"},
    {"--scored", "inputs.scored", "scored clips CSV"},
    {"--clean", "inputs.clean_manifest", "clean manifest CSV"},
    {"--noisy", "inputs.noisy_manifest", "noisy manifest CSV"},
    {"--manifest", "inputs.manifest", "manifest CSV to process"},
    {"--truth", "inputs.truth", "clip_id,label_id CSV"},
    {"--tau", "tau", "relevance threshold"},
    {"--seed", "seed", "random seed"},
    {"--threads", "threads", "scoring threads"},
    {"--noise-kind", "noise.kind", "uniform | conditional | substitution"},
    {"--rho", "noise.rho", "fraction of training labels to corrupt"},
    {"--geometric-p", "noise.geometric_p", "geometric offset parameter"},
    {"--noise-seed", "noise.seed", "seed for noise injection (defaults to --seed)"},
    {"--query", "freesound.query", "search query"},
    {"--max-pages", "freesound.max_pages", "page limit per run"},
    {"--page-size", "freesound.page_size", "results per page"},
    {"--base-url", "freesound.base_url", "API origin"},
    {"--concurrency", "freesound.concurrency", "parallel downloads"},
    {"--converter", "converter", "audio conversion command template"},
    {"--host", "serve.host", "listen address"},
    {"--port", "serve.port", "listen port"},
};

using Command = void (*)(Run&);

int Main(int argc, char** argv) {
  CLI::App app{"Ontology-driven audio clip curation and label-noise tools", "clipcurate"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string report_path;
  std::vector<std::string> overrides;
  std::map<std::string, std::string> flag_values;
  app.add_option("--config", config_path, "YAML config file");
  app.add_option("--report", report_path, "run report path (default <output-dir>/reports/)");
  app.add_option("--set", overrides, "override any setting: key=value")->take_all();
  for (const auto& b : kFlags) app.add_option(b.flag, flag_values[b.key], b.help);

  const std::vector<std::pair<std::string, std::pair<std::string, Command>>> commands = {
      {"reduce-fsd50k",
       {"reduce multi-label ground truth to a single-label manifest", ReduceFsd50k}},
      {"fetch-metadata", {"page clip metadata into the resumable cache", FetchMetadataCmd}},
      {"download", {"download and convert cached clips", DownloadCmd}},
      {"label", {"score clips against the label queries", LabelCmd}},
      {"curate", {"build the paired clean and noisy manifests", CurateCmd}},
      {"inject-noise", {"corrupt training labels synthetically", InjectNoiseCmd}},
      {"mix", {"substitute noisy clips into the clean training split", MixCmd}},
      {"evaluate", {"measure label accuracy against ground truth", EvaluateCmd}},
      {"serve", {"run the listening-test service", ServeCmd}},
      {"estimate", {"noise estimate from a judgment log", EstimateCmd}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  Command command = nullptr;
  for (const auto& [name, entry] : commands) {
    if (name == subcommand) command = entry.second;
  }

  const auto started = std::chrono::steady_clock::now();
  Settings settings;
  try {
    if (!config_path.empty()) settings.LoadYaml(config_path);
    for (const auto& b : kFlags) {
      auto* opt = app.get_option(b.flag);
      if (opt->count() == 0) continue;
      settings.Set(b.key, flag_values[b.key]);
      settings.flag_keys.insert(b.key);
    }
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("set", "expected key=value: " + o);
      const std::string key = o.substr(0, eq);
      if (LooksLikeSecret(key)) {
        throw ConfigError(key, "credentials are read from the environment only");
      }
      settings.Set(key, o.substr(eq + 1));
      settings.flag_keys.insert(key);
    }
    Tau(settings);
    settings.Uint("seed");
  } catch (const ConfigError& e) {
    PrintError("config", e.what(), e.field());
    return 2;
  }

  Run run{subcommand, settings};
  try {
    command(run);
  } catch (const ConfigError& e) {
    PrintError("config", e.what(), e.field());
    return 2;
  } catch (const AuthError& e) {
    PrintError("auth", e.what());
    return 1;
  } catch (const ResumableAbort& e) {
    json err = {{"error", "resumable_abort"}, {"message", e.what()}, {"next_page", e.next_page()}};
    std::cerr << err.dump() << std::endl;
    return 1;
  } catch (const PairingError& e) {
    PrintError("pairing", e.what(), e.class_id());
    return 1;
  } catch (const std::exception& e) {
    PrintError("operation", e.what());
    return 1;
  }

  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  json report = {{"subcommand", subcommand},
                 {"seed", settings.Uint("seed")},
                 {"tau", Tau(settings)},
                 {"tool_version", std::string(kToolVersion)},
                 {"input_digests", run.input_digests},
                 {"counts", run.counts},
                 {"dropped_classes", run.dropped},
                 {"outputs", run.outputs},
                 {"duration_ms", elapsed.count()}};
  const fs::path report_file = report_path.empty()
                                   ? settings.Path("paths.output_dir") / "reports" /
                                         (subcommand + ".json")
                                   : fs::path(report_path);
  try {
    WriteFile(report_file, report.dump(2) + "\n");
  } catch (const std::exception& e) {
    PrintError("operation", std::string("cannot write report: ") + e.what());
    return 1;
  }
  std::cout << report.dump() << std::endl;
  return 0;
}

}  // namespace
}  // namespace clipcurate

int main(int argc, char** argv) { return clipcurate::Main(argc, argv); }
