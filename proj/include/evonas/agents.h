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

#ifndef EVONAS_AGENTS_H_
#define EVONAS_AGENTS_H_

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "evonas/benchmarks.h"
#include "evonas/policy_net.h"
#include "evonas/random.h"
#include "evonas/search_space.h"

namespace evonas {

enum class AgentKind { kRandom, kNeural, kEvolutionary, kEvoNas };
enum class TrainerKind { kNone, kReinforce, kPqt };
enum class PqtCapacityMode { kFixed, kFraction };

std::string AgentKindName(AgentKind kind);
std::optional<AgentKind> ParseAgentKind(std::string_view name);
std::string TrainerKindName(TrainerKind kind);
std::optional<TrainerKind> ParseTrainerKind(std::string_view name);
std::string PqtCapacityModeName(PqtCapacityMode mode);
std::optional<PqtCapacityMode> ParsePqtCapacityMode(std::string_view name);

struct AgentConfig {
  AgentKind kind = AgentKind::kRandom;
  TrainerKind trainer = TrainerKind::kNone;
  double mutation_probability = 0.3;
  std::size_t population_size = 500;
  std::size_t tournament_size = 50;
  double learning_rate = 5e-4;
  double entropy_penalty = 0.0;
  PqtCapacityMode pqt_capacity_mode = PqtCapacityMode::kFraction;
  double pqt_value = 0.05;
  bool pqt_dedup = true;
  std::size_t hidden_size = 64;
  OptimizerConfig::Kind optimizer = OptimizerConfig::Kind::kSgd;
  double clip_norm = 10.0;
  bool baseline_enabled = true;
  double baseline_decay = 0.95;
  Seed seed = 0;

  bool learns() const {
    return (kind == AgentKind::kNeural || kind == AgentKind::kEvoNas) &&
           trainer != TrainerKind::kNone;
  }
  bool mutates() const {
    return kind == AgentKind::kEvolutionary || kind == AgentKind::kEvoNas;
  }
  bool uses_policy() const {
    return kind == AgentKind::kNeural || kind == AgentKind::kEvoNas;
  }

  // Throws Error(kConfig) naming the offending field.
  void Validate() const;
};

// fixed: K = value; fraction: K = max(1, floor(value * trials_so_far)).
std::size_t PqtCapacity(PqtCapacityMode mode, double value,
                        std::size_t trials_so_far);

// Named presets ("learn_to_count/evo_nas_pqt", "nasbench/evolutionary", ...).
const std::map<std::string, AgentConfig>& PresetConfigs();
std::optional<AgentConfig> FindPreset(const std::string& name);

// Aging population: the most recent `capacity` results, oldest first.
class Population {
 public:
  explicit Population(std::size_t capacity);

  // Appends; when full, evicts and returns the oldest entry.
  std::optional<TrialResult> Add(TrialResult result);

  // Tournament over min(sample_size, size()) entries drawn uniformly without
  // replacement; the winner has the highest reward (ties: lowest trial_id).
  // Requires a nonempty population.
  const TrialResult& Tournament(std::size_t sample_size, Rng& rng) const;

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::deque<TrialResult>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<TrialResult> entries_;
};

// Best results seen so far, ordered by reward (descending) then trial_id
// (ascending). A capacity of nullopt keeps everything, which lets callers
// take top-K views whose K grows over time.
class PriorityQueue {
 public:
  explicit PriorityQueue(std::optional<std::size_t> capacity,
                         bool deduplicate = true);

  // Returns true if the result is retained.
  bool Offer(const TrialResult& result);

  std::size_t size() const { return entries_.size(); }
  std::optional<std::size_t> capacity() const { return capacity_; }

  // Best-first; at most k entries.
  std::vector<TrialResult> Top(std::size_t k) const;
  std::vector<Genotype> TopGenotypes(std::size_t k) const;
  std::vector<TrialResult> Entries() const { return Top(entries_.size()); }

 private:
  struct Order {
    bool operator()(const TrialResult& a, const TrialResult& b) const;
  };

  std::optional<std::size_t> capacity_;
  bool deduplicate_;
  std::set<TrialResult, Order> entries_;
  std::unordered_set<Genotype, GenotypeHash> genotypes_;
};

struct Proposal {
  TrialId trial_id = 0;
  Genotype genotype;
  std::optional<TrialId> parent_id;
  std::size_t num_mutated = 0;
  // "bootstrap" when a mutation agent sampled without a parent.
  std::string note;
};

// Random, Neural, Evolutionary and Evo-NAS agents behind one
// propose/observe interface. Not thread-safe: callers serialize Propose and
// Observe. Several proposals may be outstanding between observations.
class Agent {
 public:
  Agent(AgentConfig config, SearchSpace space);

  Proposal Propose(TrialId trial_id);
  void Observe(const TrialResult& result);

  const AgentConfig& config() const { return config_; }
  const SearchSpace& space() const { return space_; }
  const Population& population() const { return population_; }
  const PriorityQueue& queue() const { return queue_; }
  // Null for agents without a network.
  std::shared_ptr<const PolicyParams> policy() const { return policy_; }
  const BaselineState& baseline() const { return baseline_; }
  std::size_t trials_observed() const { return trials_observed_; }

  // Resumable state: population, queue, outstanding traces, policy,
  // optimizer, baseline and random state. The config and space are not
  // stored; Restore expects an agent constructed with the same ones.
  void SaveState(std::ostream& out) const;
  void RestoreState(std::istream& in);

 private:
  Genotype RandomMutation(const Genotype& parent, std::vector<bool>& mask);
  void Train(const TrialResult& result);

  AgentConfig config_;
  SearchSpace space_;
  Rng rng_;
  Population population_;
  PriorityQueue queue_;
  std::shared_ptr<const PolicyParams> policy_;
  std::unique_ptr<Optimizer> optimizer_;
  BaselineState baseline_;
  std::map<TrialId, SampleTrace> pending_;
  std::size_t trials_observed_ = 0;
};

}  // namespace evonas

#endif  // EVONAS_AGENTS_H_
