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

#ifndef EVONAS_SEARCH_SPACE_H_
#define EVONAS_SEARCH_SPACE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "evonas/random.h"

namespace evonas {

// One categorical decision in the sequence.
struct Choice {
  std::string name;
  std::size_t cardinality = 1;
  // Empty, or exactly `cardinality` labels.
  std::vector<std::string> value_labels;
};

// A complete assignment of value indices, one per choice, in space order.
struct Genotype {
  std::vector<std::size_t> values;

  std::size_t size() const { return values.size(); }
  std::size_t operator[](std::size_t i) const { return values[i]; }
  friend bool operator==(const Genotype&, const Genotype&) = default;
  friend auto operator<=>(const Genotype&, const Genotype&) = default;
};

std::string FormatGenotype(const Genotype& g, char separator = ';');

struct LengthMismatch {
  std::size_t expected;
  std::size_t got;
  friend bool operator==(const LengthMismatch&, const LengthMismatch&) =
      default;
};

struct IndexOutOfRange {
  std::size_t position;
  std::size_t index;
  std::size_t cardinality;
  friend bool operator==(const IndexOutOfRange&, const IndexOutOfRange&) =
      default;
};

using GenotypeError = std::variant<LengthMismatch, IndexOutOfRange>;

std::string DescribeGenotypeError(const GenotypeError& error);

using BigInt = boost::multiprecision::cpp_int;

// Immutable ordered list of choices (length >= 1).
class SearchSpace {
 public:
  // Throws Error(kInvalidArgument) if the choice list is empty, a
  // cardinality is zero, or a label list has the wrong length.
  explicit SearchSpace(std::vector<Choice> choices);

  // Unnamed choices ("c0", "c1", ...) with the given cardinalities.
  static SearchSpace FromCardinalities(
      const std::vector<std::size_t>& cardinalities);

  std::size_t length() const { return choices_.size(); }
  const Choice& choice(std::size_t i) const { return choices_[i]; }
  const std::vector<Choice>& choices() const { return choices_; }
  std::size_t cardinality_at(std::size_t i) const {
    return choices_[i].cardinality;
  }
  std::vector<std::size_t> cardinalities() const;

  // Product of per-position cardinalities.
  BigInt Cardinality() const;

  // Cardinality() if it fits in 64 bits and is <= limit, otherwise nullopt.
  std::optional<std::uint64_t> CardinalityAtMost(std::uint64_t limit) const;

  std::optional<GenotypeError> Validate(const Genotype& g) const;
  // Throws Error(kInvalidGenotype) carrying the description of Validate().
  void CheckValid(const Genotype& g) const;

  // Validates the first prefix.size() positions only; prefix.size() <= length.
  std::optional<GenotypeError> ValidatePrefix(
      std::span<const std::size_t> prefix) const;

  Genotype UniformSample(Rng& rng) const;

  // Mixed-radix rank/unrank over the whole space (position 0 most
  // significant). Valid only when the cardinality fits in 64 bits.
  std::uint64_t Rank(const Genotype& g) const;
  Genotype Unrank(std::uint64_t rank) const;

  friend bool operator==(const SearchSpace& a, const SearchSpace& b);

 private:
  std::vector<Choice> choices_;
};

// n choices of cardinality n; value index i stands for the integer i + 1.
SearchSpace MakeLearnToCountSpace(std::size_t n);

// Space definition documents: a JSON list of {"name": ..., "values": [...]}
// objects in choice order.
SearchSpace ParseSpaceDefinition(std::string_view json_text);
std::string SerializeSpaceDefinition(const SearchSpace& space);
SearchSpace LoadSpaceDefinition(const std::string& path);

// The bundled 20-choice text-classification space (two-tower models).
const SearchSpace& TextClassificationSpace();
std::string_view TextClassificationSpaceDefinition();

}  // namespace evonas

#endif  // EVONAS_SEARCH_SPACE_H_
