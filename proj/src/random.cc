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

#include "evonas/random.h"

#include <sstream>
#include <vector>

#include "evonas/error.h"

namespace evonas {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidGenotype:
      return "InvalidGenotype";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kSpaceTooLarge:
      return "SpaceTooLarge";
    case ErrorCode::kEmptyBatch:
      return "EmptyBatch";
    case ErrorCode::kEmptyQueue:
      return "EmptyQueue";
    case ErrorCode::kConfig:
      return "ConfigError";
    case ErrorCode::kParse:
      return "ParseError";
    case ErrorCode::kIo:
      return "IoError";
  }
  return "Unknown";
}

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Seed DeriveSeed(Seed parent, std::uint64_t stream) {
  return Mix64(Mix64(parent) ^ Mix64(stream ^ 0x5851f42d4c957f2dULL));
}

Seed DeriveSeed(Seed parent, std::string_view stream) {
  // FNV-1a over the stream name, then the integer derivation.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return DeriveSeed(parent, h);
}

std::uint64_t Rng::UniformInt(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "UniformInt(0)");
  if (n == 1) return 0;
  // Rejection sampling on the top of the range removes modulo bias.
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::UniformDouble() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::UniformReal(double lo, double hi) {
  return lo + (hi - lo) * UniformDouble();
}

bool Rng::Bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return UniformDouble() < p;
}

std::size_t Rng::Categorical(std::span<const double> probabilities) {
  if (probabilities.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "Categorical over empty support");
  }
  if (probabilities.size() == 1) return 0;
  const double u = UniformDouble();
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  return probabilities.size() - 1;
}

std::vector<std::size_t> Rng::SampleWithoutReplacement(std::size_t n,
                                                       std::size_t k) {
  if (k > n) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot draw more items than available");
  }
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + UniformInt(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::string Rng::SerializeState() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void Rng::RestoreState(const std::string& state) {
  std::istringstream in(state);
  in >> engine_;
  if (!in) throw Error(ErrorCode::kParse, "corrupt random state");
}

}  // namespace evonas
