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

#include "evonas/agents.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "evonas/error.h"

namespace evonas {
namespace {

using nlohmann::json;

Error ConfigError(const std::string& field, const std::string& message) {
  return Error(ErrorCode::kConfig, "agent." + field + ": " + message);
}

json ResultToJson(const TrialResult& r) {
  json j;
  j["trial_id"] = r.trial_id;
  j["genotype"] = r.genotype.values;
  j["reward"] = r.reward;
  j["parent_id"] = r.parent_id ? json(*r.parent_id) : json(nullptr);
  j["note"] = r.proposer_note;
  return j;
}

TrialResult ResultFromJson(const json& j) {
  TrialResult r;
  r.trial_id = j.at("trial_id").get<TrialId>();
  r.genotype.values = j.at("genotype").get<std::vector<std::size_t>>();
  r.reward = j.at("reward").get<double>();
  if (!j.at("parent_id").is_null()) r.parent_id = j.at("parent_id").get<TrialId>();
  r.proposer_note = j.at("note").get<std::string>();
  return r;
}

std::vector<double> ToStdVector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd FromStdVector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

AgentConfig Base(AgentKind kind, TrainerKind trainer) {
  AgentConfig c;
  c.kind = kind;
  c.trainer = trainer;
  return c;
}

}  // namespace

std::string AgentKindName(AgentKind kind) {
  switch (kind) {
    case AgentKind::kRandom:
      return "random";
    case AgentKind::kNeural:
      return "neural";
    case AgentKind::kEvolutionary:
      return "evolutionary";
    case AgentKind::kEvoNas:
      return "evo_nas";
  }
  return "?";
}

std::optional<AgentKind> ParseAgentKind(std::string_view name) {
  for (AgentKind k : {AgentKind::kRandom, AgentKind::kNeural,
                      AgentKind::kEvolutionary, AgentKind::kEvoNas}) {
    if (AgentKindName(k) == name) return k;
  }
  return std::nullopt;
}

std::string TrainerKindName(TrainerKind kind) {
  switch (kind) {
    case TrainerKind::kNone:
      return "none";
    case TrainerKind::kReinforce:
      return "reinforce";
    case TrainerKind::kPqt:
      return "pqt";
  }
  return "?";
}

std::optional<TrainerKind> ParseTrainerKind(std::string_view name) {
  for (TrainerKind k :
       {TrainerKind::kNone, TrainerKind::kReinforce, TrainerKind::kPqt}) {
    if (TrainerKindName(k) == name) return k;
  }
  return std::nullopt;
}

std::string PqtCapacityModeName(PqtCapacityMode mode) {
  return mode == PqtCapacityMode::kFixed ? "fixed" : "fraction";
}

std::optional<PqtCapacityMode> ParsePqtCapacityMode(std::string_view name) {
  if (name == "fixed") return PqtCapacityMode::kFixed;
  if (name == "fraction") return PqtCapacityMode::kFraction;
  return std::nullopt;
}

void AgentConfig::Validate() const {
  if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0)) {
    throw ConfigError("mutation_probability", "must be in [0, 1]");
  }
  if (population_size < 1) {
    throw ConfigError("population_size", "must be >= 1");
  }
  if (tournament_size < 1 || tournament_size > population_size) {
    throw ConfigError("tournament_size", "must be in [1, population_size]");
  }
  if (learns()) {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ConfigError("learning_rate", "must be > 0 when training");
    }
  }
  if (!std::isfinite(entropy_penalty) || entropy_penalty < 0.0) {
    throw ConfigError("entropy_penalty", "must be finite and >= 0");
  }
  if (pqt_capacity_mode == PqtCapacityMode::kFixed) {
    if (!(pqt_value >= 1.0) || pqt_value != std::floor(pqt_value)) {
      throw ConfigError("pqt_value", "fixed capacity must be an integer >= 1");
    }
  } else if (!(pqt_value > 0.0 && pqt_value <= 1.0)) {
    throw ConfigError("pqt_value", "fraction must be in (0, 1]");
  }
  if (hidden_size < 1) throw ConfigError("hidden_size", "must be >= 1");
  if (!std::isfinite(clip_norm)) throw ConfigError("clip_norm", "must be finite");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) {
    throw ConfigError("baseline_decay", "must be in [0, 1)");
  }
}

std::size_t PqtCapacity(PqtCapacityMode mode, double value,
                        std::size_t trials_so_far) {
  if (mode == PqtCapacityMode::kFixed) {
    return static_cast<std::size_t>(value);
  }
  const auto k = static_cast<std::size_t>(
      std::floor(value * static_cast<double>(trials_so_far)));
  return std::max<std::size_t>(1, k);
}

const std::map<std::string, AgentConfig>& PresetConfigs() {
  static const auto* presets = [] {
    auto* m = new std::map<std::string, AgentConfig>();
    const auto add = [m](const std::string& name, AgentConfig c) {
      c.Validate();
      (*m)[name] = c;
    };

    // Learn-to-count: p = 0.3, P = 500, S = 50 for both mutation agents.
    AgentConfig random = Base(AgentKind::kRandom, TrainerKind::kNone);
    AgentConfig evolutionary =
        Base(AgentKind::kEvolutionary, TrainerKind::kNone);
    evolutionary.mutation_probability = 0.3;

    // The learning agents use a 16-unit cell trained with Adam.
    AgentConfig neural = Base(AgentKind::kNeural, TrainerKind::kPqt);
    neural.hidden_size = 16;
    neural.optimizer = OptimizerConfig::Kind::kAdam;
    neural.learning_rate = 0.0005;
    neural.entropy_penalty = 0.1;
    neural.pqt_value = 0.05;

    AgentConfig evo_nas = Base(AgentKind::kEvoNas, TrainerKind::kPqt);
    evo_nas.hidden_size = 16;
    evo_nas.optimizer = OptimizerConfig::Kind::kAdam;
    evo_nas.mutation_probability = 0.3;
    evo_nas.learning_rate = 0.0001;
    evo_nas.entropy_penalty = 0.2;
    evo_nas.pqt_value = 0.20;

    add("learn_to_count/random", random);
    add("learn_to_count/evolutionary", evolutionary);
    add("learn_to_count/neural_pqt", neural);
    neural.trainer = TrainerKind::kReinforce;
    add("learn_to_count/neural_reinforce", neural);
    add("learn_to_count/evo_nas_pqt", evo_nas);
    evo_nas.trainer = TrainerKind::kReinforce;
    add("learn_to_count/evo_nas_reinforce", evo_nas);

    // NASBench-style tabular landscapes: PQT keeps the top 20% for both
    // network agents.
    add("nasbench/random", random);
    add("nasbench/evolutionary", evolutionary);
    AgentConfig nb_neural = Base(AgentKind::kNeural, TrainerKind::kPqt);
    nb_neural.learning_rate = 0.001;
    nb_neural.entropy_penalty = 0.1;
    nb_neural.pqt_value = 0.20;
    add("nasbench/neural_pqt", nb_neural);
    nb_neural.trainer = TrainerKind::kReinforce;
    add("nasbench/neural_reinforce", nb_neural);
    AgentConfig nb_evo_nas = Base(AgentKind::kEvoNas, TrainerKind::kPqt);
    nb_evo_nas.mutation_probability = 0.2;
    nb_evo_nas.learning_rate = 0.00005;
    nb_evo_nas.entropy_penalty = 0.01;
    nb_evo_nas.pqt_value = 0.20;
    add("nasbench/evo_nas_pqt", nb_evo_nas);
    nb_evo_nas.trainer = TrainerKind::kReinforce;
    nb_evo_nas.learning_rate = 0.0002;
    add("nasbench/evo_nas_reinforce", nb_evo_nas);
    return m;
  }();
  return *presets;
}

std::optional<AgentConfig> FindPreset(const std::string& name) {
  const auto& presets = PresetConfigs();
  const auto it = presets.find(name);
  if (it == presets.end()) return std::nullopt;
  return it->second;
}

Population::Population(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) {
    throw Error(ErrorCode::kInvalidArgument, "population capacity must be >= 1");
  }
}

std::optional<TrialResult> Population::Add(TrialResult result) {
  entries_.push_back(std::move(result));
  if (entries_.size() <= capacity_) return std::nullopt;
  TrialResult evicted = std::move(entries_.front());
  entries_.pop_front();
  return evicted;
}

const TrialResult& Population::Tournament(std::size_t sample_size,
                                          Rng& rng) const {
  if (entries_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "tournament on empty population");
  }
  const std::size_t k = std::min(std::max<std::size_t>(sample_size, 1),
                                 entries_.size());
  const TrialResult* best = nullptr;
  for (std::size_t index : rng.SampleWithoutReplacement(entries_.size(), k)) {
    const TrialResult& candidate = entries_[index];
    if (best == nullptr || candidate.reward > best->reward ||
        (candidate.reward == best->reward &&
         candidate.trial_id < best->trial_id)) {
      best = &candidate;
    }
  }
  return *best;
}

bool PriorityQueue::Order::operator()(const TrialResult& a,
                                      const TrialResult& b) const {
  if (a.reward != b.reward) return a.reward > b.reward;
  return a.trial_id < b.trial_id;
}

PriorityQueue::PriorityQueue(std::optional<std::size_t> capacity,
                             bool deduplicate)
    : capacity_(capacity), deduplicate_(deduplicate) {
  if (capacity_ && *capacity_ < 1) {
    throw Error(ErrorCode::kInvalidArgument, "queue capacity must be >= 1");
  }
}

bool PriorityQueue::Offer(const TrialResult& result) {
  if (deduplicate_ && genotypes_.contains(result.genotype)) return false;
  auto [it, inserted] = entries_.insert(result);
  if (!inserted) return false;
  if (deduplicate_) genotypes_.insert(result.genotype);
  if (capacity_ && entries_.size() > *capacity_) {
    auto worst = std::prev(entries_.end());
    const bool rejected_self = worst == it;
    if (deduplicate_) genotypes_.erase(worst->genotype);
    entries_.erase(worst);
    return !rejected_self;
  }
  return true;
}

std::vector<TrialResult> PriorityQueue::Top(std::size_t k) const {
  std::vector<TrialResult> out;
  out.reserve(std::min(k, entries_.size()));
  for (const TrialResult& r : entries_) {
    if (out.size() >= k) break;
    out.push_back(r);
  }
  return out;
}

std::vector<Genotype> PriorityQueue::TopGenotypes(std::size_t k) const {
  std::vector<Genotype> out;
  out.reserve(std::min(k, entries_.size()));
  for (const TrialResult& r : entries_) {
    if (out.size() >= k) break;
    out.push_back(r.genotype);
  }
  return out;
}

Agent::Agent(AgentConfig config, SearchSpace space)
    : config_(config),
      space_(std::move(space)),
      rng_(DeriveSeed(config.seed, "agent")),
      population_(config.population_size),
      queue_(config.pqt_capacity_mode == PqtCapacityMode::kFixed
                 ? std::optional<std::size_t>(
                       static_cast<std::size_t>(config.pqt_value))
                 : std::nullopt,
             config.pqt_dedup) {
  config_.Validate();
  if (config_.uses_policy()) {
    policy_ = std::make_shared<const PolicyParams>(InitUniformPolicy(
        space_, config_.hidden_size, DeriveSeed(config_.seed, "policy")));
  }
  if (config_.learns()) {
    OptimizerConfig opt;
    opt.kind = config_.optimizer;
    opt.learning_rate = config_.learning_rate;
    opt.clip_norm = config_.clip_norm;
    optimizer_ = std::make_unique<Optimizer>(opt);
  }
  baseline_.enabled = config_.baseline_enabled;
  baseline_.decay = config_.baseline_decay;
}

Genotype Agent::RandomMutation(const Genotype& parent, std::vector<bool>& mask) {
  Genotype child = parent;
  mask.assign(space_.length(), false);
  for (std::size_t i = 0; i < space_.length(); ++i) {
    if (rng_.Bernoulli(config_.mutation_probability)) {
      child.values[i] =
          static_cast<std::size_t>(rng_.UniformInt(space_.cardinality_at(i)));
      mask[i] = true;
    }
  }
  return child;
}

Proposal Agent::Propose(TrialId trial_id) {
  Proposal proposal;
  proposal.trial_id = trial_id;
  const bool keep_trace = config_.learns() &&
                          config_.trainer == TrainerKind::kReinforce;
  const TrialResult* parent = nullptr;
  if (config_.mutates()) {
    if (population_.empty()) {
      proposal.note = "bootstrap";
    } else {
      parent = &population_.Tournament(config_.tournament_size, rng_);
      proposal.parent_id = parent->trial_id;
    }
  }

  switch (config_.kind) {
    case AgentKind::kRandom:
      proposal.genotype = space_.UniformSample(rng_);
      proposal.num_mutated = space_.length();
      break;
    case AgentKind::kEvolutionary:
      if (parent == nullptr) {
        proposal.genotype = space_.UniformSample(rng_);
        proposal.num_mutated = space_.length();
      } else {
        std::vector<bool> mask;
        proposal.genotype = RandomMutation(parent->genotype, mask);
        proposal.num_mutated =
            static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
      }
      break;
    case AgentKind::kNeural:
    case AgentKind::kEvoNas: {
      SampleTrace trace =
          parent == nullptr
              ? SampleSequence(*policy_, space_, rng_)
              : MutateSequence(*policy_, space_, parent->genotype,
                               config_.mutation_probability, rng_);
      proposal.genotype = trace.genotype;
      proposal.num_mutated = trace.NumMutated();
      if (keep_trace) pending_[trial_id] = std::move(trace);
      break;
    }
  }
  return proposal;
}

void Agent::Observe(const TrialResult& result) {
  space_.CheckValid(result.genotype);
  ++trials_observed_;
  if (config_.mutates()) population_.Add(result);
  if (config_.learns()) Train(result);
}

void Agent::Train(const TrialResult& result) {
  if (config_.trainer == TrainerKind::kPqt) {
    queue_.Offer(result);
    const std::size_t k = PqtCapacity(config_.pqt_capacity_mode,
                                      config_.pqt_value, trials_observed_);
    const std::vector<Genotype> top = queue_.TopGenotypes(k);
    policy_ = std::make_shared<const PolicyParams>(PqtUpdate(
        *policy_, space_, top, config_.entropy_penalty, *optimizer_));
    return;
  }

  ScoredTrace item;
  item.reward = result.reward;
  const auto it = pending_.find(result.trial_id);
  if (it != pending_.end()) {
    item.trace = std::move(it->second);
    pending_.erase(it);
    if (item.trace.genotype != result.genotype) {
      throw Error(ErrorCode::kInvalidGenotype,
                  "observed genotype differs from proposal " +
                      std::to_string(result.trial_id));
    }
  } else {
    // Not proposed by this agent: credit every position.
    item.trace.genotype = result.genotype;
    item.trace.mutated_mask.assign(space_.length(), true);
  }
  policy_ = std::make_shared<const PolicyParams>(
      ReinforceUpdate(*policy_, space_, std::span(&item, 1), baseline_,
                      config_.entropy_penalty, *optimizer_));
}

void Agent::SaveState(std::ostream& out) const {
  json j;
  j["format"] = "evonas-agent-state";
  j["version"] = 1;
  j["kind"] = AgentKindName(config_.kind);
  j["trials_observed"] = trials_observed_;
  j["rng"] = rng_.SerializeState();
  json population = json::array();
  for (const auto& r : population_.entries()) population.push_back(ResultToJson(r));
  j["population"] = population;
  json queue = json::array();
  for (const auto& r : queue_.Entries()) queue.push_back(ResultToJson(r));
  j["queue"] = queue;
  json pending = json::array();
  for (const auto& [id, trace] : pending_) {
    json p;
    p["trial_id"] = id;
    p["genotype"] = trace.genotype.values;
    p["log_probs"] = trace.log_probs;
    p["entropies"] = trace.entropies;
    p["mask"] = trace.mutated_mask;
    pending.push_back(p);
  }
  j["pending"] = pending;
  if (policy_) j["policy"] = ToStdVector(policy_->Flatten());
  if (optimizer_) {
    j["optimizer"] = {{"steps", optimizer_->steps()},
                      {"m", ToStdVector(optimizer_->first_moment())},
                      {"v", ToStdVector(optimizer_->second_moment())}};
  }
  j["baseline"] = baseline_.value ? json(*baseline_.value) : json(nullptr);
  out << j.dump() << "\n";
  if (!out) throw Error(ErrorCode::kIo, "failed to write agent state");
}

void Agent::RestoreState(std::istream& in) {
  json j;
  try {
    in >> j;
    if (j.at("format") != "evonas-agent-state" || j.at("version") != 1) {
      throw Error(ErrorCode::kParse, "not an agent state document");
    }
    if (j.at("kind") != AgentKindName(config_.kind)) {
      throw Error(ErrorCode::kParse, "agent state is for a different kind");
    }
    trials_observed_ = j.at("trials_observed").get<std::size_t>();
    rng_.RestoreState(j.at("rng").get<std::string>());
    population_ = Population(config_.population_size);
    for (const auto& r : j.at("population")) population_.Add(ResultFromJson(r));
    queue_ = PriorityQueue(queue_.capacity(), config_.pqt_dedup);
    for (const auto& r : j.at("queue")) queue_.Offer(ResultFromJson(r));
    pending_.clear();
    for (const auto& p : j.at("pending")) {
      SampleTrace trace;
      trace.genotype.values = p.at("genotype").get<std::vector<std::size_t>>();
      trace.log_probs = p.at("log_probs").get<std::vector<double>>();
      trace.entropies = p.at("entropies").get<std::vector<double>>();
      trace.mutated_mask = p.at("mask").get<std::vector<bool>>();
      pending_[p.at("trial_id").get<TrialId>()] = std::move(trace);
    }
    if (policy_) {
      PolicyParams params = *policy_;
      params.Unflatten(FromStdVector(j.at("policy").get<std::vector<double>>()));
      policy_ = std::make_shared<const PolicyParams>(std::move(params));
    }
    if (optimizer_) {
      const auto& o = j.at("optimizer");
      optimizer_->RestoreState(o.at("steps").get<long long>(),
                               FromStdVector(o.at("m").get<std::vector<double>>()),
                               FromStdVector(o.at("v").get<std::vector<double>>()));
    }
    baseline_.value.reset();
    if (!j.at("baseline").is_null()) baseline_.value = j.at("baseline").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("agent state: ") + e.what());
  }
}

}  // namespace evonas
