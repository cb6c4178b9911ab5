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

#include "evonas/experiment_config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "evonas/error.h"

namespace evonas {
namespace {

using nlohmann::json;

Error ConfigError(const std::string& field, const std::string& message) {
  return Error(ErrorCode::kConfig, field + ": " + message);
}

class Reader {
 public:
  Reader(const json& object, std::string prefix)
      : object_(object), prefix_(std::move(prefix)) {
    if (!object_.is_object()) {
      throw ConfigError(
          prefix_.empty() ? "config" : prefix_.substr(0, prefix_.size() - 1),
          "expected an object");
    }
    for (const auto& [key, value] : object_.items()) {
      (void)value;
      unread_.insert(key);
    }
  }

  const json* Find(const std::string& key) {
    unread_.erase(key);
    const auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  void Real(const std::string& key, double& out) {
    if (const json* v = Find(key)) {
      if (!v->is_number()) throw ConfigError(prefix_ + key, "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(prefix_ + key, "must be finite");
    }
  }

  void Count(const std::string& key, std::size_t& out) {
    if (const json* v = Find(key)) {
      if (!v->is_number_unsigned()) {
        throw ConfigError(prefix_ + key, "expected a non-negative integer");
      }
      out = v->get<std::size_t>();
    }
  }

  void SeedValue(const std::string& key, Seed& out) {
    if (const json* v = Find(key)) {
      if (!v->is_number_unsigned()) {
        throw ConfigError(prefix_ + key, "expected a non-negative integer");
      }
      out = v->get<Seed>();
    }
  }

  void Bool(const std::string& key, bool& out) {
    if (const json* v = Find(key)) {
      if (!v->is_boolean()) throw ConfigError(prefix_ + key, "expected true or false");
      out = v->get<bool>();
    }
  }

  template <typename T, typename ParseFn>
  void Enum(const std::string& key, T& out, ParseFn parse) {
    if (const json* v = Find(key)) {
      if (!v->is_string()) throw ConfigError(prefix_ + key, "expected a string");
      const auto parsed = parse(v->get<std::string>());
      if (!parsed) {
        throw ConfigError(prefix_ + key,
                          "unknown value '" + v->get<std::string>() + "'");
      }
      out = *parsed;
    }
  }

  void Text(const std::string& key, std::string& out) {
    if (const json* v = Find(key)) {
      if (!v->is_string()) throw ConfigError(prefix_ + key, "expected a string");
      out = v->get<std::string>();
    }
  }

  void Finish() const {
    if (!unread_.empty()) {
      throw ConfigError(prefix_ + *unread_.begin(), "unknown field");
    }
  }

 private:
  const json& object_;
  std::string prefix_;
  std::set<std::string> unread_;
};

json AgentToJson(const AgentConfig& a) {
  return json{
      {"kind", AgentKindName(a.kind)},
      {"trainer", TrainerKindName(a.trainer)},
      {"mutation_probability", a.mutation_probability},
      {"population_size", a.population_size},
      {"tournament_size", a.tournament_size},
      {"learning_rate", a.learning_rate},
      {"entropy_penalty", a.entropy_penalty},
      {"pqt_capacity_mode", PqtCapacityModeName(a.pqt_capacity_mode)},
      {"pqt_value", a.pqt_value},
      {"pqt_dedup", a.pqt_dedup},
      {"hidden_size", a.hidden_size},
      {"optimizer", OptimizerKindName(a.optimizer)},
      {"clip_norm", a.clip_norm},
      {"baseline_enabled", a.baseline_enabled},
      {"baseline_decay", a.baseline_decay},
      {"seed", a.seed},
  };
}

AgentConfig AgentFromJson(const json& j) {
  AgentConfig a;
  Reader r(j, "agent.");
  r.Enum("kind", a.kind, ParseAgentKind);
  r.Enum("trainer", a.trainer, ParseTrainerKind);
  r.Real("mutation_probability", a.mutation_probability);
  r.Count("population_size", a.population_size);
  r.Count("tournament_size", a.tournament_size);
  r.Real("learning_rate", a.learning_rate);
  r.Real("entropy_penalty", a.entropy_penalty);
  r.Enum("pqt_capacity_mode", a.pqt_capacity_mode, ParsePqtCapacityMode);
  r.Real("pqt_value", a.pqt_value);
  r.Bool("pqt_dedup", a.pqt_dedup);
  r.Count("hidden_size", a.hidden_size);
  r.Enum("optimizer", a.optimizer, ParseOptimizerKind);
  r.Real("clip_norm", a.clip_norm);
  r.Bool("baseline_enabled", a.baseline_enabled);
  r.Real("baseline_decay", a.baseline_decay);
  r.SeedValue("seed", a.seed);
  r.Finish();
  return a;
}

// Converts a bare override value to JSON.
json OverrideValue(std::string_view text) {
  json value = json::parse(text.begin(), text.end(), nullptr,
                           /*allow_exceptions=*/false);
  if (value.is_discarded()) return json(std::string(text));
  return value;
}

}  // namespace

json ExperimentConfigToJson(const ExperimentConfig& c) {
  json j{
      {"agent", AgentToJson(c.agent)},
      {"benchmark", c.benchmark},
      {"total_trials", c.total_trials},
      {"workers", c.workers},
      {"replicas", c.replicas},
      {"base_seed", c.base_seed},
      {"moving_average_window", c.moving_average_window},
      {"ci_level", c.ci_level},
      {"evaluation_duration", c.evaluation_duration},
      {"real_threads", c.real_threads},
  };
  j["space_cardinalities"] =
      c.space_cardinalities ? json(*c.space_cardinalities) : json(nullptr);
  return j;
}

ExperimentConfig ExperimentConfigFromJson(const json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  if (const json* agent = r.Find("agent")) c.agent = AgentFromJson(*agent);
  r.Text("benchmark", c.benchmark);
  r.Count("total_trials", c.total_trials);
  r.Count("workers", c.workers);
  r.Count("replicas", c.replicas);
  r.SeedValue("base_seed", c.base_seed);
  r.Count("moving_average_window", c.moving_average_window);
  r.Real("ci_level", c.ci_level);
  r.Real("evaluation_duration", c.evaluation_duration);
  r.Bool("real_threads", c.real_threads);
  if (const json* cards = r.Find("space_cardinalities"); cards && !cards->is_null()) {
    if (!cards->is_array()) {
      throw ConfigError("space_cardinalities", "expected a list of integers");
    }
    std::vector<std::size_t> values;
    for (const json& v : *cards) {
      if (!v.is_number_unsigned()) {
        throw ConfigError("space_cardinalities", "expected a list of integers");
      }
      values.push_back(v.get<std::size_t>());
    }
    c.space_cardinalities = std::move(values);
  }
  r.Finish();
  return c;
}

std::string SerializeExperimentConfig(const ExperimentConfig& config) {
  return ExperimentConfigToJson(config).dump(2) + "\n";
}

ExperimentConfig ParseExperimentConfig(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr,
                       /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::kConfig, "config: invalid JSON");
  return ExperimentConfigFromJson(j);
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, "config: cannot open '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  return ParseExperimentConfig(text.str());
}

void ApplyOverride(ExperimentConfig& config, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::kConfig, "override '" + std::string(assignment) +
                                        "': expected key=value");
  }
  const std::string key(assignment.substr(0, eq));
  json j = ExperimentConfigToJson(config);
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw ConfigError(key, "unknown field");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = OverrideValue(assignment.substr(eq + 1));
  config = ExperimentConfigFromJson(j);
}

void ApplyOverrides(ExperimentConfig& config,
                    std::span<const std::string> assignments) {
  for (const std::string& a : assignments) ApplyOverride(config, a);
}

}  // namespace evonas
