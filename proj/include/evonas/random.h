// Copyright 2026 The evonas Authors.
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

#ifndef EVONAS_RANDOM_H_
#define EVONAS_RANDOM_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evonas {

using Seed = std::uint64_t;

// SplitMix64 finalizer. Used for seed derivation and hashing; it is a
// bijection on 64-bit words.
std::uint64_t Mix64(std::uint64_t x);

// Derives an independent child seed from `parent` for the named stream.
// Distinct (parent, stream) pairs give statistically independent seeds.
Seed DeriveSeed(Seed parent, std::uint64_t stream);
Seed DeriveSeed(Seed parent, std::string_view stream);

// Seeded random source. The engine (mt19937_64) is fully specified by the
// standard; the distributions below are implemented here rather than taken
// from <random>, whose distribution algorithms are implementation-defined.
// That keeps every draw identical across standard libraries.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform integer in [0, n). Requires n >= 1.
  std::uint64_t UniformInt(std::uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double UniformDouble();

  // Uniform double in [lo, hi).
  double UniformReal(double lo, double hi);

  bool Bernoulli(double p);

  // Index drawn from a discrete distribution given by nonnegative weights
  // summing to (approximately) 1.
  std::size_t Categorical(std::span<const double> probabilities);

  // Fisher-Yates partial shuffle: `k` distinct indices drawn uniformly
  // without replacement from [0, n), in draw order.
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t n,
                                                    std::size_t k);

  std::string SerializeState() const;
  void RestoreState(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace evonas

#endif  // EVONAS_RANDOM_H_
