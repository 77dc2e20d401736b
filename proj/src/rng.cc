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

#include "clipcurate/rng.h"

#include <limits>
#include <numeric>
#include <stdexcept>

namespace clipcurate {

std::uint64_t SeededRng::UniformBelow(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("UniformBelow: n must be positive");
  // Largest multiple of n that fits in 2^64, expressed as a rejection bound.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x > limit);
  return x % n;
}

double SeededRng::UniformUnit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

bool SeededRng::Bernoulli(double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return UniformUnit() < p;
}

std::uint64_t SeededRng::Geometric(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("Geometric: p must be in (0, 1]");
  std::uint64_t trials = 1;
  while (!Bernoulli(p)) ++trials;
  return trials;
}

std::vector<std::size_t> SeededRng::SampleWithoutReplacement(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("SampleWithoutReplacement: k > n");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(UniformBelow(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::vector<std::size_t> SeededRng::SampleWithReplacement(std::size_t n, std::size_t k) {
  if (n == 0 && k > 0) throw std::invalid_argument("SampleWithReplacement: empty population");
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(static_cast<std::size_t>(UniformBelow(n)));
  return out;
}

}  // namespace clipcurate
