// Copyright 2026 The FAQ Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "faq/random.h"

#include <cmath>
#include <numbers>
#include <numeric>

#include "faq/errors.h"

namespace faq {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kSplitSalt = 0xD1B54A32D192ED03ULL;

}  // namespace

std::uint64_t Mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

CounterRng::CounterRng(std::uint64_t seed) : key_(Mix64(seed + kGolden)) {}

CounterRng CounterRng::Split(std::uint64_t tag) const {
  return CounterRng(FromKey{}, Mix64(key_ ^ Mix64(tag * kSplitSalt + kGolden)));
}

std::uint64_t CounterRng::NextU64() {
  ++counter_;
  // Two rounds so neighbouring keys and counters decorrelate.
  return Mix64(Mix64(key_ + counter_ * kGolden) ^ key_);
}

double CounterRng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double CounterRng::Normal() {
  // 1 - U lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

bool CounterRng::Bernoulli(double p) { return Uniform() < p; }

std::uint64_t CounterRng::UniformInt(std::uint64_t n) {
  if (n == 0) throw ArgumentError("UniformInt: empty range");
  // Rejection sampling on the largest multiple of n.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % n;
}

std::vector<std::size_t> Permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  CounterRng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.UniformInt(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace faq
