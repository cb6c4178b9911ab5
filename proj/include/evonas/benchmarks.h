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

#ifndef EVONAS_BENCHMARKS_H_
#define EVONAS_BENCHMARKS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/rational.hpp>

#include "evonas/random.h"
#include "evonas/search_space.h"

namespace evonas {

using TrialId = std::int64_t;

// One evaluated proposal: the unit of agent feedback.
struct TrialResult {
  TrialId trial_id = 0;
  Genotype genotype;
  double reward = 0.0;
  std::optional<TrialId> parent_id;
  std::string proposer_note;
};

// A reward evaluator over a fixed space. Implementations are immutable after
// construction and Evaluate() is reentrant.
class Benchmark {
 public:
  virtual ~Benchmark() = default;

  virtual const SearchSpace& space() const = 0;
  // Throws Error(kInvalidGenotype) for genotypes outside space().
  virtual double Evaluate(const Genotype& g) const = 0;
  virtual std::string Describe() const = 0;

  // Simulated evaluation time, used only to order completions when several
  // workers are in flight. Zero means results arrive instantly.
  double duration() const { return duration_; }
  void set_duration(double d) { duration_ = d; }

 private:
  double duration_ = 0.0;
};

// ---------------------------------------------------------------------------
// Learn to count.

// Reward denominator for 1-based values a_1..a_n:
//   a_1^2 + sum_k (a_{k+1} - a_k)^2 + (a_n - (n+1))^2.
// Exact integer arithmetic.
std::int64_t LearnToCountDenominator(std::span<const std::int64_t> values);

// (n+1) / denominator for 1-based values; n = values.size() >= 1.
double LearnToCountRewardFromValues(std::span<const std::int64_t> values);

// Reward of a 0-based genotype from MakeLearnToCountSpace(n).
// Throws Error(kInvalidGenotype) if g does not belong to that space.
double LearnToCountReward(const Genotype& g, std::size_t n);

class LearnToCountBenchmark final : public Benchmark {
 public:
  explicit LearnToCountBenchmark(std::size_t n);

  const SearchSpace& space() const override { return space_; }
  double Evaluate(const Genotype& g) const override;
  std::string Describe() const override;
  std::size_t n() const { return n_; }

 private:
  std::size_t n_;
  SearchSpace space_;
};

using Rational = boost::rational<std::int64_t>;

// Exact mean of 1/r over all n^n sequences. Throws kSpaceTooLarge when
// n^n > 10^6.
Rational InverseRewardMean(std::size_t n);

// All maximizers of the reward (1-based values) by exhaustive enumeration.
// Throws kSpaceTooLarge when n^n > 10^6.
std::vector<std::vector<std::int64_t>> EnumerateLearnToCountMaximizers(
    std::size_t n);

// ---------------------------------------------------------------------------
// Tabular landscapes.

struct GenotypeHash {
  std::size_t operator()(const Genotype& g) const;
};

class TabularBenchmark final : public Benchmark {
 public:
  using Table = std::unordered_map<Genotype, double, GenotypeHash>;

  // Every key must validate against `space` and every reward must be finite;
  // throws Error(kInvalidGenotype / kInvalidArgument) otherwise.
  TabularBenchmark(SearchSpace space, Table table, double default_reward);

  const SearchSpace& space() const override { return space_; }
  double Evaluate(const Genotype& g) const override;
  std::string Describe() const override;

  const Table& table() const { return table_; }
  double default_reward() const { return default_reward_; }

  // Text file:
  //   line 1: comma-separated cardinalities
  //   line 2: default reward
  //   then:   comma-separated indices followed by the reward
  // Rows are written in rank order so output is deterministic.
  std::string Serialize() const;
  static TabularBenchmark Parse(std::string_view text);
  static TabularBenchmark Load(const std::string& path);
  void Save(const std::string& path) const;

 private:
  SearchSpace space_;
  Table table_;
  double default_reward_;
};

struct SparseLandscapeOptions {
  Seed seed = 0;
  double frac_invalid = 0.3;
  double plateau = 0.85;
  double spread = 0.05;
};

// Full table over `space`: round(frac_invalid * |space|) genotypes chosen at
// random get reward 0, the rest plateau + U[-spread, spread] clamped to
// [0, 1]. Throws kSpaceTooLarge above 10^6 genotypes.
TabularBenchmark GenerateSparseLandscape(const SearchSpace& space,
                                         const SparseLandscapeOptions& options);

// ---------------------------------------------------------------------------
// Deterministic stand-in evaluator for the bundled text space.

double MockTextReward(const Genotype& g, Seed seed);

class MockTextBenchmark final : public Benchmark {
 public:
  explicit MockTextBenchmark(Seed seed) : seed_(seed) {}

  const SearchSpace& space() const override {
    return TextClassificationSpace();
  }
  double Evaluate(const Genotype& g) const override {
    return MockTextReward(g, seed_);
  }
  std::string Describe() const override;

 private:
  Seed seed_;
};

}  // namespace evonas

#endif  // EVONAS_BENCHMARKS_H_
