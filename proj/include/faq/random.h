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

#ifndef FAQ_RANDOM_H_
#define FAQ_RANDOM_H_

#include <cstdint>
#include <vector>

namespace faq {

// Counter-based generator: the n-th output is a pure function of (key, n),
// so streams are reproducible on every platform and can be split by tag
// (run seed, round index, task id) without sharing state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed);

  // Independent child stream keyed by `tag`. Does not advance this stream.
  CounterRng Split(std::uint64_t tag) const;

  std::uint64_t NextU64();
  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();
  // Standard normal via Box-Muller (two counter draws per call).
  double Normal();
  bool Bernoulli(double p);
  // Uniform integer in [0, n); n must be > 0.
  std::uint64_t UniformInt(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  struct FromKey {};
  CounterRng(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// SplitMix64 finalizer; bijective on 64-bit words.
std::uint64_t Mix64(std::uint64_t x);

// Seeded Fisher-Yates permutation of [0, n).
std::vector<std::size_t> Permutation(std::size_t n, std::uint64_t seed);

}  // namespace faq

#endif  // FAQ_RANDOM_H_
