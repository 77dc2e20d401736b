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

#include "clipcurate/noise_lab.h"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "clipcurate/util.h"

namespace clipcurate {

namespace {

// Two-sided standard normal quantile for the given coverage, by bisection on
// erfc. Accurate to ~1e-12, well beyond what the intervals need.
double NormalQuantile(double confidence) {
  const double tail = 1.0 - confidence;
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (std::erfc(mid / std::sqrt(2.0)) > tail) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::string FormatRho(double rho) {
  std::string s = FormatFixed(rho, 4);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

std::string_view NoiseKindName(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kUniform:
      return "uniform";
    case NoiseKind::kConditional:
      return "conditional";
    case NoiseKind::kSubstitution:
      return "substitution";
  }
  return "uniform";
}

NoiseKind ParseNoiseKind(std::string_view name) {
  if (name == "uniform") return NoiseKind::kUniform;
  if (name == "conditional") return NoiseKind::kConditional;
  if (name == "substitution") return NoiseKind::kSubstitution;
  throw std::invalid_argument("unknown noise kind '" + std::string(name) + "'");
}

void NoiseSpec::Validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("rho must be in [0, 1], got " + std::to_string(rho));
  }
  if (kind == NoiseKind::kConditional && !(p_geometric > 0.0 && p_geometric < 1.0)) {
    throw std::invalid_argument("geometric p must be in (0, 1), got " +
                                std::to_string(p_geometric));
  }
}

std::size_t SelectionCount(double rho, std::size_t n) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in [0, 1]");
  return static_cast<std::size_t>(std::floor(rho * static_cast<double>(n) + 0.5));
}

std::uint64_t DrawOffset(SeededRng& rng, NoiseKind kind, std::size_t num_classes,
                         double p_geometric) {
  if (num_classes < 2) throw std::invalid_argument("label noise needs at least 2 classes");
  switch (kind) {
    case NoiseKind::kUniform:
      return 1 + rng.UniformBelow(num_classes - 1);
    case NoiseKind::kConditional: {
      std::uint64_t i;
      do {
        i = rng.Geometric(p_geometric);
      } while (i % num_classes == 0);
      return i;
    }
    case NoiseKind::kSubstitution:
      break;
  }
  throw std::invalid_argument("substitution noise has no label offset");
}

DatasetManifest InjectSyntheticNoise(const DatasetManifest& manifest, const NoiseSpec& spec,
                                     const LabelSet& classes, const Ontology* ontology) {
  spec.Validate();
  if (spec.kind == NoiseKind::kSubstitution) {
    throw std::invalid_argument("InjectSyntheticNoise needs a uniform or conditional spec");
  }
  const std::size_t k = classes.size();
  if (k < 2) throw std::invalid_argument("label noise needs at least 2 classes");

  auto names = manifest.LabelNames();
  auto name_of = [&](const std::string& id) -> std::string {
    if (ontology && ontology->contains(id)) return ontology->node(id).name;
    auto it = names.find(id);
    return it == names.end() ? std::string() : it->second;
  };

  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    if (manifest.entries[i].split == Split::kTrain) train.push_back(i);
  }
  DatasetManifest out = manifest;
  SeededRng rng(spec.seed);
  const std::size_t count = SelectionCount(spec.rho, train.size());
  for (std::size_t pick : rng.SampleWithoutReplacement(train.size(), count)) {
    ManifestEntry& e = out.entries[train[pick]];
    const std::size_t from = classes.IndexOf(e.label_id);
    const std::uint64_t offset = DrawOffset(rng, spec.kind, k, spec.p_geometric);
    const std::size_t to = static_cast<std::size_t>((from + offset % k) % k);
    e.label_id = classes.labels()[to];
    e.label_name = name_of(e.label_id);
  }

  out.name = manifest.name + "-" + std::string(NoiseKindName(spec.kind)) + "-rho" +
             FormatRho(spec.rho);
  NoiseProvenance noise;
  noise.kind = std::string(NoiseKindName(spec.kind));
  noise.rho = spec.rho;
  if (spec.kind == NoiseKind::kConditional) noise.p_geometric = spec.p_geometric;
  noise.seed = spec.seed;
  noise.n_train = train.size();
  noise.n_changed = count;
  noise.base_manifest = manifest.name;
  out.provenance.noise = noise;
  out.provenance.tool_version = std::string(kToolVersion);
  return out;
}

DatasetManifest MixSubstitution(const DatasetManifest& clean, const DatasetManifest& noisy,
                                double rho, std::uint64_t seed, double reference_noise_rate) {
  NoiseSpec{NoiseKind::kSubstitution, rho, 0.5, seed}.Validate();

  std::unordered_set<std::string> clean_ids;
  for (const auto& e : clean.entries) clean_ids.insert(e.clip_id);
  std::map<std::string, std::vector<const ManifestEntry*>> pools;
  for (const auto& e : noisy.entries) {
    if (e.split != Split::kTrain) continue;
    if (clean_ids.count(e.clip_id)) {
      throw std::invalid_argument("clip '" + e.clip_id + "' is in both the clean and noisy pools");
    }
    pools[e.label_id].push_back(&e);
  }

  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < clean.entries.size(); ++i) {
    if (clean.entries[i].split == Split::kTrain) train.push_back(i);
  }
  DatasetManifest out = clean;
  SeededRng rng(seed);
  const std::size_t count = SelectionCount(rho, train.size());
  for (std::size_t pick : rng.SampleWithoutReplacement(train.size(), count)) {
    ManifestEntry& e = out.entries[train[pick]];
    auto& pool = pools[e.label_id];
    if (pool.empty()) {
      throw std::invalid_argument("no unused noisy training clip left for class '" +
                                  e.label_id + "'");
    }
    std::size_t j = static_cast<std::size_t>(rng.UniformBelow(pool.size()));
    e.clip_id = pool[j]->clip_id;
    pool[j] = pool.back();
    pool.pop_back();
  }

  out.name = clean.name + "-mix-rho" + FormatRho(rho);
  NoiseProvenance noise;
  noise.kind = std::string(NoiseKindName(NoiseKind::kSubstitution));
  noise.rho = rho;
  noise.seed = seed;
  noise.n_train = train.size();
  noise.n_changed = count;
  noise.reference_noise_rate = reference_noise_rate;
  noise.effective_noise_rate = rho * reference_noise_rate;
  noise.base_manifest = clean.name;
  noise.noisy_manifest = noisy.name;
  out.provenance.noise = noise;
  out.provenance.tool_version = std::string(kToolVersion);
  return out;
}

std::string_view CategoryName(Category c) {
  static constexpr std::array<std::string_view, kNumCategories> kNames = {
      "PP", "PNP/IV", "PNP/OOV", "NP/IV", "NP/OOV", "U"};
  return kNames[static_cast<std::size_t>(c)];
}

std::optional<Category> ParseCategory(std::string_view name) {
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (CategoryName(static_cast<Category>(i)) == name) return static_cast<Category>(i);
  }
  return std::nullopt;
}

JudgmentTable JudgmentTable::FromCounts(const std::array<std::size_t, kNumCategories>& counts) {
  JudgmentTable t;
  for (std::size_t c : counts) t.n += c;
  if (t.n == 0) throw std::invalid_argument("judgment table is empty");
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    t.proportions[i] = static_cast<double>(counts[i]) / static_cast<double>(t.n);
  }
  return t;
}

JudgmentTable JudgmentTable::FromProportions(
    const std::array<double, kNumCategories>& proportions, std::size_t n, double tolerance) {
  if (n == 0) throw std::invalid_argument("judgment table needs n >= 1");
  double sum = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("proportion outside [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw std::invalid_argument("proportions sum to " + std::to_string(sum) + ", not 1");
  }
  return JudgmentTable{proportions, n};
}

double ConfidenceHalfWidth(double p_hat, std::size_t n, double confidence) {
  if (n == 0) throw std::invalid_argument("confidence interval needs n >= 1");
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw std::invalid_argument("p_hat outside [0, 1]");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must be in (0, 1)");
  }
  const double z = confidence == 0.95 ? 1.959964 : NormalQuantile(confidence);
  return z * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
}

NoiseEstimate NoiseBreakdown(const JudgmentTable& table, double confidence) {
  const double unsure = table[Category::kUnsure];
  const double decided = 1.0 - unsure;
  if (!(decided > 0.0)) {
    throw std::invalid_argument("every judgment is Unsure; noise rate is undefined");
  }
  const double np = table[Category::kNpIv] + table[Category::kNpOov];
  const double pnp = table[Category::kPnpIv] + table[Category::kPnpOov];
  const double oov = table[Category::kPnpOov] + table[Category::kNpOov];

  NoiseEstimate est;
  est.confidence = confidence;
  est.n = table.n;
  est.n_decided = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(decided * static_cast<double>(table.n))));
  est.pnp_incorrect.rate = std::min(1.0, (pnp + np) / decided);
  est.pnp_correct.rate = std::min(1.0, np / decided);
  est.pnp_incorrect.half_width =
      ConfidenceHalfWidth(est.pnp_incorrect.rate, est.n_decided, confidence);
  est.pnp_correct.half_width = ConfidenceHalfWidth(est.pnp_correct.rate, est.n_decided, confidence);
  est.oov_share = (pnp + np) > 0.0 ? oov / (pnp + np) : 0.0;
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    est.cell_half_widths[i] = ConfidenceHalfWidth(table.proportions[i], table.n, confidence);
  }
  return est;
}

}  // namespace clipcurate
