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

#include "evonas/benchmarks.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "evonas/error.h"
#include "evonas/format.h"

namespace evonas {
namespace {

constexpr std::uint64_t kEnumerationLimit = 1000000;

std::uint64_t EnumerationSize(std::size_t n) {
  const auto size = MakeLearnToCountSpace(n).CardinalityAtMost(kEnumerationLimit);
  if (!size) {
    throw Error(ErrorCode::kSpaceTooLarge,
                "n^n exceeds 10^6 for n=" + std::to_string(n));
  }
  return *size;
}

std::vector<std::int64_t> ToValues(const Genotype& g) {
  std::vector<std::int64_t> values(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    values[i] = static_cast<std::int64_t>(g[i]) + 1;
  }
  return values;
}

// Uniform double in [0, 1) from a hash word.
double HashToUnit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

std::int64_t LearnToCountDenominator(std::span<const std::int64_t> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidGenotype, "empty learn-to-count sequence");
  }
  const auto n = static_cast<std::int64_t>(values.size());
  std::int64_t d = values.front() * values.front();
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const std::int64_t step = values[k + 1] - values[k];
    d += step * step;
  }
  const std::int64_t tail = values.back() - (n + 1);
  d += tail * tail;
  return d;
}

double LearnToCountRewardFromValues(std::span<const std::int64_t> values) {
  const auto n = static_cast<std::int64_t>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 1 || values[i] > n) {
      throw Error(ErrorCode::kInvalidGenotype,
                  "value " + std::to_string(values[i]) + " at position " +
                      std::to_string(i) + " outside [1, " + std::to_string(n) +
                      "]");
    }
  }
  return static_cast<double>(n + 1) /
         static_cast<double>(LearnToCountDenominator(values));
}

double LearnToCountReward(const Genotype& g, std::size_t n) {
  if (g.size() != n) {
    throw Error(ErrorCode::kInvalidGenotype,
                DescribeGenotypeError(LengthMismatch{n, g.size()}));
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] >= n) {
      throw Error(ErrorCode::kInvalidGenotype,
                  DescribeGenotypeError(IndexOutOfRange{i, g[i], n}));
    }
  }
  return LearnToCountRewardFromValues(ToValues(g));
}

LearnToCountBenchmark::LearnToCountBenchmark(std::size_t n)
    : n_(n), space_(MakeLearnToCountSpace(n)) {}

double LearnToCountBenchmark::Evaluate(const Genotype& g) const {
  return LearnToCountReward(g, n_);
}

std::string LearnToCountBenchmark::Describe() const {
  return "learn_to_count:" + std::to_string(n_);
}

Rational InverseRewardMean(std::size_t n) {
  const std::uint64_t total = EnumerationSize(n);
  const SearchSpace space = MakeLearnToCountSpace(n);
  std::int64_t sum = 0;
  for (std::uint64_t rank = 0; rank < total; ++rank) {
    sum += LearnToCountDenominator(ToValues(space.Unrank(rank)));
  }
  // 1/r = D / (n+1), averaged over all sequences.
  return Rational(sum, static_cast<std::int64_t>(total) *
                           static_cast<std::int64_t>(n + 1));
}

std::vector<std::vector<std::int64_t>> EnumerateLearnToCountMaximizers(
    std::size_t n) {
  const std::uint64_t total = EnumerationSize(n);
  const SearchSpace space = MakeLearnToCountSpace(n);
  // Comparing denominators avoids any floating-point ties.
  std::int64_t best = -1;
  std::vector<std::vector<std::int64_t>> argmax;
  for (std::uint64_t rank = 0; rank < total; ++rank) {
    std::vector<std::int64_t> values = ToValues(space.Unrank(rank));
    const std::int64_t d = LearnToCountDenominator(values);
    if (best < 0 || d < best) {
      best = d;
      argmax.clear();
    }
    if (d == best) argmax.push_back(std::move(values));
  }
  return argmax;
}

std::size_t GenotypeHash::operator()(const Genotype& g) const {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (std::size_t v : g.values) h = Mix64(h ^ v);
  return static_cast<std::size_t>(h);
}

TabularBenchmark::TabularBenchmark(SearchSpace space, Table table,
                                   double default_reward)
    : space_(std::move(space)),
      table_(std::move(table)),
      default_reward_(default_reward) {
  if (!std::isfinite(default_reward_)) {
    throw Error(ErrorCode::kInvalidArgument, "default reward must be finite");
  }
  for (const auto& [g, reward] : table_) {
    space_.CheckValid(g);
    if (!std::isfinite(reward)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-finite reward for genotype " + FormatGenotype(g, ','));
    }
  }
}

double TabularBenchmark::Evaluate(const Genotype& g) const {
  space_.CheckValid(g);
  const auto it = table_.find(g);
  return it == table_.end() ? default_reward_ : it->second;
}

std::string TabularBenchmark::Describe() const {
  return "tabular(" + std::to_string(table_.size()) + " entries)";
}

std::string TabularBenchmark::Serialize() const {
  std::vector<std::pair<std::uint64_t, double>> rows;
  rows.reserve(table_.size());
  for (const auto& [g, reward] : table_) rows.emplace_back(space_.Rank(g), reward);
  std::sort(rows.begin(), rows.end());

  std::string out;
  const auto cards = space_.cardinalities();
  for (std::size_t i = 0; i < cards.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += std::to_string(cards[i]);
  }
  out += "\n" + FormatDouble(default_reward_) + "\n";
  for (const auto& [rank, reward] : rows) {
    out += FormatGenotype(space_.Unrank(rank), ',');
    out += "," + FormatDouble(reward) + "\n";
  }
  return out;
}

TabularBenchmark TabularBenchmark::Parse(std::string_view text) {
  std::vector<std::string_view> lines = Split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  }
  const auto fail = [](std::size_t line_no, const std::string& what) {
    return Error(ErrorCode::kParse,
                 "tabular benchmark line " + std::to_string(line_no) + ": " +
                     what);
  };
  if (lines.size() < 2) {
    throw fail(lines.size() + 1, "expected cardinalities and default reward");
  }

  std::vector<std::size_t> cards;
  for (std::string_view field : Split(lines[0], ',')) {
    const auto value = ParseInt(field);
    if (!value || *value < 1) {
      throw fail(1, "bad cardinality '" + std::string(field) + "'");
    }
    cards.push_back(static_cast<std::size_t>(*value));
  }
  SearchSpace space = SearchSpace::FromCardinalities(cards);

  const auto default_reward = ParseDouble(lines[1]);
  if (!default_reward || !std::isfinite(*default_reward)) {
    throw fail(2, "bad default reward '" + std::string(lines[1]) + "'");
  }

  Table table;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto fields = Split(lines[i], ',');
    if (fields.size() != cards.size() + 1) {
      throw fail(line_no, "expected " + std::to_string(cards.size() + 1) +
                              " fields, got " + std::to_string(fields.size()));
    }
    Genotype g;
    for (std::size_t k = 0; k < cards.size(); ++k) {
      const auto index = ParseInt(fields[k]);
      if (!index || *index < 0) {
        throw fail(line_no, "bad index '" + std::string(fields[k]) + "'");
      }
      g.values.push_back(static_cast<std::size_t>(*index));
    }
    if (auto error = space.Validate(g)) {
      throw fail(line_no, DescribeGenotypeError(*error));
    }
    const auto reward = ParseDouble(fields.back());
    if (!reward || !std::isfinite(*reward)) {
      throw fail(line_no, "bad reward '" + std::string(fields.back()) + "'");
    }
    if (!table.emplace(std::move(g), *reward).second) {
      throw fail(line_no, "duplicate genotype");
    }
  }
  return TabularBenchmark(std::move(space), std::move(table), *default_reward);
}

TabularBenchmark TabularBenchmark::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return Parse(text.str());
}

void TabularBenchmark::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << Serialize();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

TabularBenchmark GenerateSparseLandscape(
    const SearchSpace& space, const SparseLandscapeOptions& options) {
  const auto size = space.CardinalityAtMost(kEnumerationLimit);
  if (!size) {
    throw Error(ErrorCode::kSpaceTooLarge,
                "sparse landscapes are limited to 10^6 genotypes");
  }
  if (!(options.frac_invalid >= 0.0 && options.frac_invalid <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "frac_invalid must be in [0, 1]");
  }
  if (!std::isfinite(options.plateau) || !std::isfinite(options.spread) ||
      options.spread < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "plateau must be finite and spread nonnegative");
  }
  const std::uint64_t total = *size;
  Rng rng(options.seed);
  const auto num_invalid = static_cast<std::size_t>(
      std::llround(options.frac_invalid * static_cast<double>(total)));
  std::vector<bool> invalid(total, false);
  for (std::size_t rank : rng.SampleWithoutReplacement(total, num_invalid)) {
    invalid[rank] = true;
  }
  TabularBenchmark::Table table;
  table.reserve(total);
  for (std::uint64_t rank = 0; rank < total; ++rank) {
    double reward = 0.0;
    if (!invalid[rank]) {
      reward = options.plateau +
               rng.UniformReal(-options.spread, options.spread);
      reward = std::clamp(reward, 0.0, 1.0);
    }
    table.emplace(space.Unrank(rank), reward);
  }
  return TabularBenchmark(space, std::move(table), 0.0);
}

double MockTextReward(const Genotype& g, Seed seed) {
  const SearchSpace& space = TextClassificationSpace();
  space.CheckValid(g);
  // Additive per-choice preferences give agents something learnable; the
  // whole-genotype term separates genotypes that differ anywhere.
  double additive = 0.0;
  std::uint64_t whole = DeriveSeed(seed, "whole");
  for (std::size_t i = 0; i < g.size(); ++i) {
    additive += HashToUnit(DeriveSeed(seed, (std::uint64_t{i} << 32) | g[i]));
    whole = Mix64(whole ^ ((std::uint64_t{i} << 32) | g[i]));
  }
  additive /= static_cast<double>(g.size());
  return 0.7 * additive + 0.3 * HashToUnit(whole);
}

std::string MockTextBenchmark::Describe() const {
  return "text_mock:" + std::to_string(seed_);
}

}  // namespace evonas
