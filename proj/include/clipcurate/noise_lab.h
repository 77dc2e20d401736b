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

#ifndef CLIPCURATE_NOISE_LAB_H_
#define CLIPCURATE_NOISE_LAB_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "clipcurate/manifest.h"
#include "clipcurate/ontology.h"
#include "clipcurate/rng.h"

namespace clipcurate {

enum class NoiseKind { kUniform, kConditional, kSubstitution };

std::string_view NoiseKindName(NoiseKind kind);
NoiseKind ParseNoiseKind(std::string_view name);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kUniform;
  double rho = 0.0;
  double p_geometric = 0.5;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument unless 0 <= rho <= 1 and 0 < p < 1.
  void Validate() const;
};

// Noise rate measured by the listening test when clip-level PNP judgments are
// counted as incorrect. Substitution mixing scales it by rho.
inline constexpr double kReferenceNoiseRate = 0.464;

// round(rho * n), halves rounded away from zero.
std::size_t SelectionCount(double rho, std::size_t n);

// Offset i added to a 0-based class index k, relabelling to (k + i) mod K.
// Uniform offsets are drawn from {1, ..., K-1}; conditional offsets from a
// geometric distribution on {1, 2, ...} with success probability p, redrawn
// while i is a multiple of K so that the label always changes.
std::uint64_t DrawOffset(SeededRng& rng, NoiseKind kind, std::size_t num_classes,
                         double p_geometric);

// Closed-set synthetic noise on the training split. Selects
// SelectionCount(rho, N) training entries uniformly without replacement, then
// relabels each one. Class indices follow the canonical order of classes.
// Label names come from the ontology when given, else from the manifest.
// Validation and test entries are left untouched.
DatasetManifest InjectSyntheticNoise(const DatasetManifest& manifest, const NoiseSpec& spec,
                                     const LabelSet& classes,
                                     const Ontology* ontology = nullptr);

// Replaces SelectionCount(rho, N) clean training entries, chosen uniformly
// without replacement, each by an unused noisy training entry with the same
// label. Per-class counts are preserved. Throws std::invalid_argument when the
// pools overlap or a class runs out of noisy entries.
DatasetManifest MixSubstitution(const DatasetManifest& clean, const DatasetManifest& noisy,
                                double rho, std::uint64_t seed,
                                double reference_noise_rate = kReferenceNoiseRate);

// Listening-test categories. PP is always in-vocabulary.
enum class Category { kPP = 0, kPnpIv, kPnpOov, kNpIv, kNpOov, kUnsure };
inline constexpr std::size_t kNumCategories = 6;

std::string_view CategoryName(Category c);  // "PP", "PNP/IV", ...
std::optional<Category> ParseCategory(std::string_view name);

struct JudgmentTable {
  std::array<double, kNumCategories> proportions{};
  std::size_t n = 0;

  double operator[](Category c) const { return proportions[static_cast<std::size_t>(c)]; }

  static JudgmentTable FromCounts(const std::array<std::size_t, kNumCategories>& counts);
  // Proportions must be non-negative and sum to 1 within tolerance. Published
  // tables are rounded, so callers may pass a looser tolerance for them.
  static JudgmentTable FromProportions(const std::array<double, kNumCategories>& proportions,
                                       std::size_t n, double tolerance = 1e-9);
};

struct RateEstimate {
  double rate = 0.0;
  double half_width = 0.0;
};

struct NoiseEstimate {
  RateEstimate pnp_incorrect;  // PNP judgments counted as label errors
  RateEstimate pnp_correct;    // PNP judgments counted as correct labels
  double oov_share = 0.0;      // OOV fraction of all errors, PNP counted as errors
  double confidence = 0.95;
  std::size_t n = 0;
  std::size_t n_decided = 0;   // judgments excluding Unsure
  std::array<double, kNumCategories> cell_half_widths{};
};

// Half-width of the normal-approximation interval z * sqrt(p (1 - p) / n).
double ConfidenceHalfWidth(double p_hat, std::size_t n, double confidence = 0.95);

// Noise rates with Unsure excluded from the denominator. Rate intervals use
// the number of decided judgments; cell intervals use all n judgments.
// Throws std::invalid_argument when every judgment is Unsure.
NoiseEstimate NoiseBreakdown(const JudgmentTable& table, double confidence = 0.95);

}  // namespace clipcurate

#endif  // CLIPCURATE_NOISE_LAB_H_
