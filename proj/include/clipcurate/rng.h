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

#ifndef CLIPCURATE_RNG_H_
#define CLIPCURATE_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

namespace clipcurate {

// Deterministic generator used by every sampling step.
//
// The engine is std::mt19937_64 seeded with a single 64-bit value, whose output
// sequence is fixed by the C++ standard. The standard distributions are
// implementation-defined, so bounded integers, Bernoulli and geometric draws are
// derived here from raw engine output instead. Results are therefore identical
// across compilers and standard libraries for the same seed.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform on [0, n). Rejection sampling on the top of the 64-bit range, so
  // there is no modulo bias. n must be > 0.
  std::uint64_t UniformBelow(std::uint64_t n);

  // Uniform on [0, 1) with 53 bits of precision.
  double UniformUnit();

  bool Bernoulli(double p);

  // Number of trials up to and including the first success, support {1, 2, ...}.
  std::uint64_t Geometric(double p);

  // k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t n, std::size_t k);

  // k indices from [0, n), duplicates allowed.
  std::vector<std::size_t> SampleWithReplacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace clipcurate

#endif  // CLIPCURATE_RNG_H_
