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

#include "evonas/orchestrator.h"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <queue>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "evonas/error.h"
#include "evonas/format.h"

namespace evonas {
namespace {

Error ConfigError(const std::string& field, const std::string& message) {
  return Error(ErrorCode::kConfig, field + ": " + message);
}

double ParseField(std::string_view key, std::string_view text) {
  const auto value = ParseDouble(text);
  if (!value) {
    throw ConfigError("benchmark",
                      "bad value for " + std::string(key) + ": '" +
                          std::string(text) + "'");
  }
  return *value;
}

std::unique_ptr<Benchmark> MakeSparseBenchmark(std::string_view args) {
  std::optional<std::vector<std::size_t>> cards;
  SparseLandscapeOptions options;
  for (std::string_view item : Split(args, ',')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("benchmark", "expected key=value in sparse descriptor");
    }
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    if (key == "cards") {
      cards.emplace();
      for (std::string_view c : Split(value, 'x')) {
        const auto n = ParseInt(c);
        if (!n || *n < 1) {
          throw ConfigError("benchmark", "bad cardinality '" + std::string(c) + "'");
        }
        cards->push_back(static_cast<std::size_t>(*n));
      }
    } else if (key == "seed") {
      const auto s = ParseInt(value);
      if (!s || *s < 0) throw ConfigError("benchmark", "bad seed");
      options.seed = static_cast<Seed>(*s);
    } else if (key == "frac_invalid") {
      options.frac_invalid = ParseField(key, value);
    } else if (key == "plateau") {
      options.plateau = ParseField(key, value);
    } else if (key == "spread") {
      options.spread = ParseField(key, value);
    } else {
      throw ConfigError("benchmark", "unknown sparse key '" + std::string(key) + "'");
    }
  }
  if (!cards) throw ConfigError("benchmark", "sparse descriptor needs cards=");
  try {
    return std::make_unique<TabularBenchmark>(GenerateSparseLandscape(
        SearchSpace::FromCardinalities(*cards), options));
  } catch (const Error& e) {
    throw ConfigError("benchmark", e.what());
  }
}

struct InFlight {
  double completion_time;
  std::size_t proposal_index;
  Proposal proposal;

  // Min-heap on (completion_time, proposal_index).
  bool operator>(const InFlight& other) const {
    if (completion_time != other.completion_time) {
      return completion_time > other.completion_time;
    }
    return proposal_index > other.proposal_index;
  }
};

double EvaluateWithContext(const Benchmark& benchmark, const Proposal& p) {
  try {
    return benchmark.Evaluate(p.genotype);
  } catch (const Error& e) {
    throw Error(e.code(), "trial " + std::to_string(p.trial_id) + " (" +
                              FormatGenotype(p.genotype) + "): " + e.what());
  }
}

TrialRecord MakeRecord(const Proposal& p, double reward,
                       std::size_t proposal_index,
                       std::size_t completion_index) {
  TrialRecord record;
  record.result.trial_id = p.trial_id;
  record.result.genotype = p.genotype;
  record.result.reward = reward;
  record.result.parent_id = p.parent_id;
  record.result.proposer_note = p.note;
  record.proposal_index = proposal_index;
  record.completion_index = completion_index;
  record.num_mutated = p.num_mutated;
  return record;
}

void RunSimulated(const ExperimentConfig& config, const Benchmark& benchmark,
                  Agent& agent, TrialLog& log) {
  std::priority_queue<InFlight, std::vector<InFlight>, std::greater<>> pending;
  const double duration = config.evaluation_duration > 0.0
                              ? config.evaluation_duration
                              : benchmark.duration();
  std::size_t proposed = 0;
  const auto propose = [&](double now) {
    ++proposed;
    pending.push({now + duration, proposed,
                  agent.Propose(static_cast<TrialId>(proposed))});
  };
  for (std::size_t w = 0; w < config.workers && proposed < config.total_trials;
       ++w) {
    propose(0.0);
  }
  while (!pending.empty()) {
    InFlight done = pending.top();
    pending.pop();
    const double reward = EvaluateWithContext(benchmark, done.proposal);
    TrialRecord record = MakeRecord(done.proposal, reward, done.proposal_index,
                                    log.records.size() + 1);
    agent.Observe(record.result);
    log.records.push_back(std::move(record));
    if (proposed < config.total_trials) propose(done.completion_time);
  }
}

// Worker threads evaluate; this thread alone touches the agent.
void RunThreaded(const ExperimentConfig& config, const Benchmark& benchmark,
                 Agent& agent, TrialLog& log) {
  struct Done {
    std::size_t proposal_index;
    Proposal proposal;
    double reward = 0.0;
    std::exception_ptr error;
  };
  std::mutex mu;
  std::condition_variable work_ready;
  std::condition_variable result_ready;
  std::deque<std::pair<std::size_t, Proposal>> work;
  std::deque<Done> results;
  bool shutdown = false;

  std::vector<std::jthread> workers;
  for (std::size_t w = 0; w < config.workers; ++w) {
    workers.emplace_back([&] {
      while (true) {
        std::pair<std::size_t, Proposal> item;
        {
          std::unique_lock lock(mu);
          work_ready.wait(lock, [&] { return shutdown || !work.empty(); });
          if (work.empty()) return;
          item = std::move(work.front());
          work.pop_front();
        }
        Done done{item.first, std::move(item.second), 0.0, nullptr};
        try {
          done.reward = EvaluateWithContext(benchmark, done.proposal);
        } catch (...) {
          done.error = std::current_exception();
        }
        {
          std::lock_guard lock(mu);
          results.push_back(std::move(done));
        }
        result_ready.notify_one();
      }
    });
  }

  std::size_t proposed = 0;
  const auto propose = [&] {
    ++proposed;
    Proposal p = agent.Propose(static_cast<TrialId>(proposed));
    {
      std::lock_guard lock(mu);
      work.emplace_back(proposed, std::move(p));
    }
    work_ready.notify_one();
  };
  std::exception_ptr failure;
  try {
    for (std::size_t w = 0; w < config.workers && proposed < config.total_trials;
         ++w) {
      propose();
    }
    while (log.records.size() < proposed) {
      Done done;
      {
        std::unique_lock lock(mu);
        result_ready.wait(lock, [&] { return !results.empty(); });
        done = std::move(results.front());
        results.pop_front();
      }
      if (done.error) std::rethrow_exception(done.error);
      TrialRecord record = MakeRecord(done.proposal, done.reward,
                                      done.proposal_index,
                                      log.records.size() + 1);
      agent.Observe(record.result);
      log.records.push_back(std::move(record));
      if (proposed < config.total_trials) propose();
    }
  } catch (...) {
    failure = std::current_exception();
  }
  {
    std::lock_guard lock(mu);
    shutdown = true;
    work.clear();
  }
  work_ready.notify_all();
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::unique_ptr<Benchmark> MakeBenchmark(std::string_view descriptor) {
  const std::size_t colon = descriptor.find(':');
  const std::string_view kind = descriptor.substr(0, colon);
  const std::string_view args =
      colon == std::string_view::npos ? std::string_view() : descriptor.substr(colon + 1);
  if (kind == "learn_to_count") {
    const auto n = ParseInt(args);
    if (!n || *n < 1) {
      throw ConfigError("benchmark", "learn_to_count needs a positive n");
    }
    return std::make_unique<LearnToCountBenchmark>(static_cast<std::size_t>(*n));
  }
  if (kind == "tabular") {
    if (args.empty()) throw ConfigError("benchmark", "tabular needs a path");
    return std::make_unique<TabularBenchmark>(
        TabularBenchmark::Load(std::string(args)));
  }
  if (kind == "sparse") return MakeSparseBenchmark(args);
  if (kind == "text_mock") {
    Seed seed = 0;
    if (!args.empty()) {
      const auto s = ParseInt(args);
      if (!s || *s < 0) throw ConfigError("benchmark", "bad text_mock seed");
      seed = static_cast<Seed>(*s);
    }
    return std::make_unique<MockTextBenchmark>(seed);
  }
  throw ConfigError("benchmark", "unknown benchmark kind '" +
                                     std::string(kind) + "'");
}

void ExperimentConfig::Validate() const {
  agent.Validate();
  if (benchmark.empty()) throw ConfigError("benchmark", "must be set");
  if (total_trials < 1) throw ConfigError("total_trials", "must be >= 1");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  if (replicas < 1) throw ConfigError("replicas", "must be >= 1");
  if (moving_average_window < 1) {
    throw ConfigError("moving_average_window", "must be >= 1");
  }
  if (!(ci_level >= 0.0 && ci_level < 1.0)) {
    throw ConfigError("ci_level", "must be in [0, 1)");
  }
  if (!(evaluation_duration >= 0.0) || !std::isfinite(evaluation_duration)) {
    throw ConfigError("evaluation_duration", "must be finite and >= 0");
  }
  if (space_cardinalities) {
    if (space_cardinalities->empty()) {
      throw ConfigError("space_cardinalities", "must not be empty");
    }
    for (std::size_t c : *space_cardinalities) {
      if (c < 1) throw ConfigError("space_cardinalities", "entries must be >= 1");
    }
  }
}

void CheckBenchmarkSpace(const ExperimentConfig& config,
                         const Benchmark& benchmark) {
  if (!config.space_cardinalities) return;
  const std::vector<std::size_t> actual = benchmark.space().cardinalities();
  if (actual != *config.space_cardinalities) {
    const auto join = [](const std::vector<std::size_t>& v) {
      std::string out;
      for (std::size_t c : v) out += (out.empty() ? "" : "x") + std::to_string(c);
      return out;
    };
    throw ConfigError("space_cardinalities",
                      "expected " + join(*config.space_cardinalities) +
                          " but benchmark has " + join(actual));
  }
}

Seed ReplicaSeed(Seed base_seed, std::size_t replica) {
  return DeriveSeed(base_seed, static_cast<std::uint64_t>(replica));
}

std::vector<double> TrialLog::Rewards() const {
  std::vector<double> rewards;
  rewards.reserve(records.size());
  for (const TrialRecord& r : records) rewards.push_back(r.result.reward);
  return rewards;
}

TrialLog RunReplica(const ExperimentConfig& config, const Benchmark& benchmark,
                    std::size_t replica) {
  config.Validate();
  CheckBenchmarkSpace(config, benchmark);
  TrialLog log;
  log.replica = replica;
  log.seed = ReplicaSeed(config.base_seed, replica);
  log.records.reserve(config.total_trials);

  AgentConfig agent_config = config.agent;
  agent_config.seed = DeriveSeed(log.seed, config.agent.seed);
  Agent agent(agent_config, benchmark.space());

  if (config.real_threads) {
    RunThreaded(config, benchmark, agent, log);
  } else {
    RunSimulated(config, benchmark, agent, log);
  }
  return log;
}

MetricSeries ComputeMetrics(std::span<const double> rewards,
                            std::size_t window) {
  if (window < 1) throw Error(ErrorCode::kInvalidArgument, "window must be >= 1");
  MetricSeries series;
  series.moving_average.reserve(rewards.size());
  series.best_so_far.reserve(rewards.size());
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    const std::size_t first = t + 1 >= window ? t + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t k = first; k <= t; ++k) sum += rewards[k];
    series.moving_average.push_back(sum / static_cast<double>(t + 1 - first));
    const double best = t == 0 ? rewards[0]
                               : std::max(series.best_so_far.back(), rewards[t]);
    series.best_so_far.push_back(best);
  }
  return series;
}

MetricSeries ComputeMetrics(const TrialLog& log, std::size_t window) {
  const std::vector<double> rewards = log.Rewards();
  return ComputeMetrics(rewards, window);
}

double NormalCriticalValue(double level) {
  if (!(level >= 0.0 && level < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence level must be in [0, 1)");
  }
  if (level == 0.0) return 0.0;
  return boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
}

PointStats SummarizeReplicas(std::span<const double> values, double ci_level) {
  if (values.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least two replicas");
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  PointStats stats;
  stats.mean = sum / n;
  double squares = 0.0;
  for (double v : values) squares += (v - stats.mean) * (v - stats.mean);
  stats.sem = std::sqrt(squares / (n - 1.0)) / std::sqrt(n);
  stats.ci_halfwidth = NormalCriticalValue(ci_level) * stats.sem;
  return stats;
}

AggregateSeries AggregateReplicas(std::span<const MetricSeries> series,
                                  double ci_level) {
  if (series.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least two replicas");
  }
  const std::size_t length = series.front().moving_average.size();
  for (const MetricSeries& s : series) {
    if (s.moving_average.size() != length || s.best_so_far.size() != length) {
      throw Error(ErrorCode::kInvalidArgument,
                  "LengthMismatch: replica series have different lengths");
    }
  }
  AggregateSeries out;
  out.ci_level = ci_level;
  out.z = NormalCriticalValue(ci_level);
  std::vector<double> column(series.size());
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t r = 0; r < series.size(); ++r) {
      column[r] = series[r].moving_average[t];
    }
    out.moving_average.push_back(SummarizeReplicas(column, ci_level));
    for (std::size_t r = 0; r < series.size(); ++r) {
      column[r] = series[r].best_so_far[t];
    }
    out.best_so_far.push_back(SummarizeReplicas(column, ci_level));
  }
  return out;
}

ComparisonReport RunComparison(
    const std::vector<std::pair<std::string, ExperimentConfig>>& configs,
    const Benchmark& benchmark, std::size_t replicas) {
  if (configs.empty()) throw ConfigError("compare", "no configurations");
  if (replicas < 1) throw ConfigError("replicas", "must be >= 1");
  for (const auto& [name, config] : configs) {
    config.Validate();
    if (config.total_trials != configs.front().second.total_trials) {
      throw ConfigError("total_trials", "differs between compared configs ('" +
                                            name + "')");
    }
  }
  ComparisonReport report;
  for (const auto& [name, config] : configs) {
    ComparisonEntry entry;
    entry.name = name;
    entry.config = config;
    entry.config.replicas = replicas;
    for (std::size_t r = 0; r < replicas; ++r) {
      entry.logs.push_back(RunReplica(entry.config, benchmark, r));
      entry.series.push_back(
          ComputeMetrics(entry.logs.back(), config.moving_average_window));
    }
    if (replicas >= 2) {
      entry.aggregate = AggregateReplicas(entry.series, config.ci_level);
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

double PairedWinFraction(const ComparisonEntry& a, const ComparisonEntry& b,
                         Metric metric, std::size_t index, bool strict) {
  const std::size_t n = std::min(a.series.size(), b.series.size());
  if (n == 0) return 0.0;
  std::size_t wins = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& sa = metric == Metric::kMovingAverage ? a.series[r].moving_average
                                                      : a.series[r].best_so_far;
    const auto& sb = metric == Metric::kMovingAverage ? b.series[r].moving_average
                                                      : b.series[r].best_so_far;
    if (index >= sa.size() || index >= sb.size()) {
      throw Error(ErrorCode::kInvalidArgument, "index beyond series length");
    }
    if (strict ? sa[index] > sb[index] : sa[index] >= sb[index]) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(n);
}

}  // namespace evonas
