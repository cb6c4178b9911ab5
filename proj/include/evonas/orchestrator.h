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

#ifndef EVONAS_ORCHESTRATOR_H_
#define EVONAS_ORCHESTRATOR_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evonas/agents.h"
#include "evonas/benchmarks.h"

namespace evonas {

// Benchmark descriptors:
//   learn_to_count:N
//   tabular:PATH
//   sparse:cards=AxBxC[,seed=S][,frac_invalid=F][,plateau=P][,spread=D]
//   text_mock[:SEED]
// Throws Error(kConfig) for malformed descriptors; file errors propagate.
std::unique_ptr<Benchmark> MakeBenchmark(std::string_view descriptor);

struct ExperimentConfig {
  AgentConfig agent;
  std::string benchmark = "learn_to_count:10";
  std::size_t total_trials = 1000;
  std::size_t workers = 1;
  std::size_t replicas = 1;
  Seed base_seed = 0;
  std::size_t moving_average_window = 50;
  double ci_level = 0.70;
  // Simulated duration of every evaluation (orders completions when
  // workers > 1). Zero keeps completion order equal to proposal order.
  double evaluation_duration = 0.0;
  // Evaluate on real threads. Throughput only: interleaving is not
  // reproducible.
  bool real_threads = false;
  // When set, the benchmark's cardinalities must equal these.
  std::optional<std::vector<std::size_t>> space_cardinalities;

  // Throws Error(kConfig) naming the offending field.
  void Validate() const;
};

// Throws Error(kConfig) if `benchmark` does not fit `config`.
void CheckBenchmarkSpace(const ExperimentConfig& config,
                         const Benchmark& benchmark);

// Seed of replica `replica`; agents in a comparison share it, which pairs
// their replicas.
Seed ReplicaSeed(Seed base_seed, std::size_t replica);

struct TrialRecord {
  TrialResult result;
  std::size_t proposal_index = 0;    // 1-based
  std::size_t completion_index = 0;  // 1-based
  std::size_t num_mutated = 0;       // positions resampled rather than copied
};

struct TrialLog {
  std::size_t replica = 0;
  Seed seed = 0;
  std::vector<TrialRecord> records;  // completion order

  std::vector<double> Rewards() const;
};

// Runs one replica: propose -> evaluate -> observe until total_trials
// results have been observed, keeping `workers` proposals in flight.
TrialLog RunReplica(const ExperimentConfig& config, const Benchmark& benchmark,
                    std::size_t replica);

struct MetricSeries {
  std::vector<double> moving_average;
  std::vector<double> best_so_far;
};

// Moving average over the last `window` rewards (fewer at the start) and the
// running maximum, indexed by completion order.
MetricSeries ComputeMetrics(std::span<const double> rewards, std::size_t window);
MetricSeries ComputeMetrics(const TrialLog& log, std::size_t window);

// Two-sided standard normal quantile: z with P(|Z| <= z) = level.
double NormalCriticalValue(double level);

struct PointStats {
  double mean = 0.0;
  double sem = 0.0;
  double ci_halfwidth = 0.0;
};

// Mean, sample-std / sqrt(R), and z * sem over R >= 2 values.
PointStats SummarizeReplicas(std::span<const double> values, double ci_level);

struct AggregateSeries {
  double ci_level = 0.0;
  double z = 0.0;
  std::vector<PointStats> moving_average;
  std::vector<PointStats> best_so_far;
};

// Per-index aggregation over replicas. Throws kInvalidArgument for fewer
// than two replicas or series of unequal length.
AggregateSeries AggregateReplicas(std::span<const MetricSeries> series,
                                  double ci_level);

struct ComparisonEntry {
  std::string name;
  ExperimentConfig config;
  std::vector<TrialLog> logs;
  std::vector<MetricSeries> series;
  std::optional<AggregateSeries> aggregate;  // absent when replicas < 2
};

struct ComparisonReport {
  std::vector<ComparisonEntry> entries;
};

// Runs `replicas` replicas of every config against one benchmark. Configs
// must share total_trials and the benchmark's space (kConfig otherwise).
ComparisonReport RunComparison(
    const std::vector<std::pair<std::string, ExperimentConfig>>& configs,
    const Benchmark& benchmark, std::size_t replicas);

enum class Metric { kMovingAverage, kBestSoFar };

// Fraction of paired replicas where a's metric at `index` (0-based) is
// >= b's (strictly greater when `strict`).
double PairedWinFraction(const ComparisonEntry& a, const ComparisonEntry& b,
                         Metric metric, std::size_t index, bool strict = false);

}  // namespace evonas

#endif  // EVONAS_ORCHESTRATOR_H_
