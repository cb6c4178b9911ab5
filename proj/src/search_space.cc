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

#include "evonas/search_space.h"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evonas/error.h"

namespace evonas {

std::string FormatGenotype(const Genotype& g, char separator) {
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i > 0) out.push_back(separator);
    out += std::to_string(g[i]);
  }
  return out;
}

std::string DescribeGenotypeError(const GenotypeError& error) {
  if (const auto* e = std::get_if<LengthMismatch>(&error)) {
    return "LengthMismatch(expected=" + std::to_string(e->expected) +
           ", got=" + std::to_string(e->got) + ")";
  }
  const auto& e = std::get<IndexOutOfRange>(error);
  return "IndexOutOfRange(position=" + std::to_string(e.position) +
         ", index=" + std::to_string(e.index) +
         ", cardinality=" + std::to_string(e.cardinality) + ")";
}

SearchSpace::SearchSpace(std::vector<Choice> choices)
    : choices_(std::move(choices)) {
  if (choices_.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "search space needs at least one choice");
  }
  for (std::size_t i = 0; i < choices_.size(); ++i) {
    const Choice& c = choices_[i];
    if (c.cardinality < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "choice " + std::to_string(i) + " has cardinality 0");
    }
    if (!c.value_labels.empty() && c.value_labels.size() != c.cardinality) {
      throw Error(ErrorCode::kInvalidArgument,
                  "choice '" + c.name + "' has " +
                      std::to_string(c.value_labels.size()) +
                      " labels for cardinality " +
                      std::to_string(c.cardinality));
    }
  }
}

SearchSpace SearchSpace::FromCardinalities(
    const std::vector<std::size_t>& cardinalities) {
  std::vector<Choice> choices;
  choices.reserve(cardinalities.size());
  for (std::size_t i = 0; i < cardinalities.size(); ++i) {
    choices.push_back({"c" + std::to_string(i), cardinalities[i], {}});
  }
  return SearchSpace(std::move(choices));
}

std::vector<std::size_t> SearchSpace::cardinalities() const {
  std::vector<std::size_t> out;
  out.reserve(choices_.size());
  for (const Choice& c : choices_) out.push_back(c.cardinality);
  return out;
}

BigInt SearchSpace::Cardinality() const {
  BigInt product = 1;
  for (const Choice& c : choices_) product *= c.cardinality;
  return product;
}

std::optional<std::uint64_t> SearchSpace::CardinalityAtMost(
    std::uint64_t limit) const {
  const BigInt total = Cardinality();
  if (total > limit) return std::nullopt;
  return total.convert_to<std::uint64_t>();
}

std::optional<GenotypeError> SearchSpace::Validate(const Genotype& g) const {
  if (g.size() != length()) return LengthMismatch{length(), g.size()};
  return ValidatePrefix(g.values);
}

std::optional<GenotypeError> SearchSpace::ValidatePrefix(
    std::span<const std::size_t> prefix) const {
  if (prefix.size() > length()) return LengthMismatch{length(), prefix.size()};
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] >= choices_[i].cardinality) {
      return IndexOutOfRange{i, prefix[i], choices_[i].cardinality};
    }
  }
  return std::nullopt;
}

void SearchSpace::CheckValid(const Genotype& g) const {
  if (auto error = Validate(g)) {
    throw Error(ErrorCode::kInvalidGenotype, DescribeGenotypeError(*error));
  }
}

Genotype SearchSpace::UniformSample(Rng& rng) const {
  Genotype g;
  g.values.reserve(length());
  for (const Choice& c : choices_) {
    g.values.push_back(static_cast<std::size_t>(rng.UniformInt(c.cardinality)));
  }
  return g;
}

std::uint64_t SearchSpace::Rank(const Genotype& g) const {
  CheckValid(g);
  std::uint64_t rank = 0;
  for (std::size_t i = 0; i < length(); ++i) {
    rank = rank * choices_[i].cardinality + g[i];
  }
  return rank;
}

Genotype SearchSpace::Unrank(std::uint64_t rank) const {
  Genotype g;
  g.values.assign(length(), 0);
  for (std::size_t i = length(); i-- > 0;) {
    g.values[i] = static_cast<std::size_t>(rank % choices_[i].cardinality);
    rank /= choices_[i].cardinality;
  }
  if (rank != 0) {
    throw Error(ErrorCode::kInvalidArgument, "rank exceeds space cardinality");
  }
  return g;
}

bool operator==(const SearchSpace& a, const SearchSpace& b) {
  if (a.length() != b.length()) return false;
  for (std::size_t i = 0; i < a.length(); ++i) {
    const Choice& x = a.choice(i);
    const Choice& y = b.choice(i);
    if (x.name != y.name || x.cardinality != y.cardinality ||
        x.value_labels != y.value_labels) {
      return false;
    }
  }
  return true;
}

SearchSpace MakeLearnToCountSpace(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  std::vector<Choice> choices;
  choices.reserve(n);
  std::vector<std::string> labels;
  for (std::size_t v = 1; v <= n; ++v) labels.push_back(std::to_string(v));
  for (std::size_t i = 0; i < n; ++i) {
    choices.push_back({"a" + std::to_string(i + 1), n, labels});
  }
  return SearchSpace(std::move(choices));
}

SearchSpace ParseSpaceDefinition(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                std::string("space definition: ") + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::kParse, "space definition must be a JSON list");
  }
  std::vector<Choice> choices;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& entry = doc[i];
    const std::string where = "space definition entry " + std::to_string(i);
    if (!entry.is_object() || !entry.contains("name") ||
        !entry["name"].is_string()) {
      throw Error(ErrorCode::kParse, where + ": missing string 'name'");
    }
    Choice c;
    c.name = entry["name"].get<std::string>();
    if (entry.contains("values")) {
      if (!entry["values"].is_array() || entry["values"].empty()) {
        throw Error(ErrorCode::kParse,
                    where + ": 'values' must be a nonempty list");
      }
      for (const auto& label : entry["values"]) {
        if (!label.is_string()) {
          throw Error(ErrorCode::kParse, where + ": labels must be strings");
        }
        c.value_labels.push_back(label.get<std::string>());
      }
      c.cardinality = c.value_labels.size();
    } else if (entry.contains("cardinality") &&
               entry["cardinality"].is_number_unsigned() &&
               entry["cardinality"].get<std::size_t>() >= 1) {
      c.cardinality = entry["cardinality"].get<std::size_t>();
    } else {
      throw Error(ErrorCode::kParse,
                  where + ": needs 'values' or a positive 'cardinality'");
    }
    choices.push_back(std::move(c));
  }
  if (choices.empty()) {
    throw Error(ErrorCode::kParse, "space definition has no choices");
  }
  return SearchSpace(std::move(choices));
}

std::string SerializeSpaceDefinition(const SearchSpace& space) {
  nlohmann::json doc = nlohmann::json::array();
  for (const Choice& c : space.choices()) {
    nlohmann::json entry;
    entry["name"] = c.name;
    if (c.value_labels.empty()) {
      entry["cardinality"] = c.cardinality;
    } else {
      entry["values"] = c.value_labels;
    }
    doc.push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

SearchSpace LoadSpaceDefinition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return ParseSpaceDefinition(text.str());
}

const SearchSpace& TextClassificationSpace() {
  static const SearchSpace* space =
      new SearchSpace(ParseSpaceDefinition(TextClassificationSpaceDefinition()));
  return *space;
}

}  // namespace evonas
