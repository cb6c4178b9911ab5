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

#ifndef EVONAS_EXPERIMENT_CONFIG_H_
#define EVONAS_EXPERIMENT_CONFIG_H_

#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "evonas/orchestrator.h"

namespace evonas {

// JSON form of an experiment config. Every field is written; on read,
// missing fields keep their defaults and unknown fields are rejected.
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config);
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& json);

std::string SerializeExperimentConfig(const ExperimentConfig& config);
ExperimentConfig ParseExperimentConfig(std::string_view text);
ExperimentConfig LoadExperimentConfig(const std::string& path);

// Applies "dotted.key=value" overrides in order, e.g.
// "agent.learning_rate=0.001" or "total_trials=200". Values are read as JSON
// when possible and as bare strings otherwise.
void ApplyOverride(ExperimentConfig& config, std::string_view assignment);
void ApplyOverrides(ExperimentConfig& config,
                    std::span<const std::string> assignments);

}  // namespace evonas

#endif  // EVONAS_EXPERIMENT_CONFIG_H_
