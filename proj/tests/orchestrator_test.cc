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
#include <cstring>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "evonas/benchmarks.h"
#include "evonas/error.h"

namespace evonas {
namespace {

ExperimentConfig Experiment(const std::string& preset, const std::string& bench,
                            std::size_t trials) {
  ExperimentConfig c;
  c.agent = *FindPreset(preset);
  c.benchmark = bench;
  c.total_trials = trials;
  return c;
}

void ExpectError(const std::function<void()>& f, ErrorCode code,
                 const std::string& fragment) {
  try {
    f();
    FAIL() << "expected an error containing " << fragment;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos)
        << e.what();
  }
}

TEST(ComputeMetricsTest, ConstantRewards) {
  const std::vector<double> rewards(10, 0.7);
  const MetricSeries m = ComputeMetrics(rewards, 3);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    EXPECT_DOUBLE_EQ(m.moving_average[i], 0.7);
    EXPECT_EQ(m.best_so_far[i], 0.7);
  }
}

TEST(ComputeMetricsTest, WindowOfTwo) {
  const MetricSeries m = ComputeMetrics(std::vector<double>{0, 1, 0, 1}, 2);
  EXPECT_EQ(m.moving_average, (std::vector<double>{0, 0.5, 0.5, 0.5}));
}

TEST(ComputeMetricsTest, BestSoFar) {
  const MetricSeries m = ComputeMetrics(std::vector<double>{0.2, 0.5, 0.4}, 50);
  EXPECT_EQ(m.best_so_far, (std::vector<double>{0.2, 0.5, 0.5}));
}

TEST(ComputeMetricsTest, MatchesWindowDefinitionOnRandomStream) {
  Rng rng(8);
  std::vector<double> rewards(500);
  for (double& r : rewards) r = rng.UniformDouble();
  for (std::size_t window : {1u, 7u, 50u, 600u}) {
    const MetricSeries m = ComputeMetrics(rewards, window);
    double best = -1.0;
    for (std::size_t t = 0; t < rewards.size(); ++t) {
      const std::size_t lo = t + 1 >= window ? t + 1 - window : 0;
      double sum = 0.0;
      for (std::size_t i = lo; i <= t; ++i) sum += rewards[i];
      EXPECT_NEAR(m.moving_average[t], sum / static_cast<double>(t + 1 - lo),
                  1e-12);
      best = std::max(best, rewards[t]);
      EXPECT_EQ(m.best_so_far[t], best);
      if (t > 0) {
        EXPECT_GE(m.best_so_far[t], m.best_so_far[t - 1]);
      }
    }
  }
}

TEST(NormalCriticalValueTest, KnownValues) {
  EXPECT_NEAR(NormalCriticalValue(0.70), 1.0364333894937898, 1e-12);
  EXPECT_NEAR(NormalCriticalValue(0.95), 1.959963984540054, 1e-12);
  EXPECT_EQ(NormalCriticalValue(0.0), 0.0);
}

TEST(SummarizeReplicasTest, TwoValues) {
  const PointStats s = SummarizeReplicas(std::vector<double>{0.4, 0.6}, 0.70);
  EXPECT_NEAR(s.mean, 0.5, 1e-15);
  EXPECT_NEAR(s.sem, 0.1, 1e-15);
  EXPECT_NEAR(s.ci_halfwidth, 0.1 * NormalCriticalValue(0.70), 1e-15);
}

TEST(SummarizeReplicasTest, IdenticalValuesAndZeroLevel) {
  const PointStats same = SummarizeReplicas(std::vector<double>(5, 0.3), 0.7);
  EXPECT_EQ(same.sem, 0.0);
  EXPECT_EQ(same.ci_halfwidth, 0.0);
  const PointStats zero = SummarizeReplicas(std::vector<double>{0.1, 0.9}, 0.0);
  EXPECT_EQ(zero.ci_halfwidth, 0.0);
}

TEST(SummarizeReplicasTest, NeedsTwoValues) {
  EXPECT_THROW(SummarizeReplicas(std::vector<double>{0.4}, 0.7), Error);
}

TEST(AggregateReplicasTest, LengthMismatch) {
  const std::vector<MetricSeries> series = {
      ComputeMetrics(std::vector<double>{0.1, 0.2}, 2),
      ComputeMetrics(std::vector<double>{0.1}, 2)};
  ExpectError([&] { AggregateReplicas(series, 0.7); },
              ErrorCode::kInvalidArgument, "LengthMismatch");
}

TEST(AggregateReplicasTest, MatchesBruteForce) {
  Rng rng(4);
  constexpr std::size_t kReplicas = 7;
  constexpr std::size_t kLength = 300;
  std::vector<MetricSeries> series;
  for (std::size_t r = 0; r < kReplicas; ++r) {
    std::vector<double> rewards(kLength);
    for (double& x : rewards) x = rng.UniformDouble();
    series.push_back(ComputeMetrics(rewards, 25));
  }
  const AggregateSeries a = AggregateReplicas(series, 0.7);
  ASSERT_EQ(a.moving_average.size(), kLength);
  for (std::size_t t = 0; t < kLength; ++t) {
    for (int which = 0; which < 2; ++which) {
      // Two-pass mean and variance in long double as the reference.
      long double sum = 0;
      for (const auto& s : series) {
        sum += which == 0 ? s.moving_average[t] : s.best_so_far[t];
      }
      const long double mean = sum / kReplicas;
      long double ss = 0;
      for (const auto& s : series) {
        const long double d =
            (which == 0 ? s.moving_average[t] : s.best_so_far[t]) - mean;
        ss += d * d;
      }
      const long double sem = std::sqrt(ss / (kReplicas - 1)) /
                              std::sqrt(static_cast<long double>(kReplicas));
      const PointStats& got =
          which == 0 ? a.moving_average[t] : a.best_so_far[t];
      EXPECT_NEAR(got.mean, static_cast<double>(mean), 1e-12);
      EXPECT_NEAR(got.sem, static_cast<double>(sem), 1e-12);
      EXPECT_NEAR(got.ci_halfwidth, a.z * static_cast<double>(sem), 1e-12);
    }
  }
}

TEST(ExperimentConfigTest, ValidateRejectsBadFields) {
  const auto expect = [](ExperimentConfig c, const std::string& field) {
    ExpectError([&] { c.Validate(); }, ErrorCode::kConfig, field);
  };
  ExperimentConfig c;
  c.total_trials = 0;
  expect(c, "total_trials");
  c = ExperimentConfig{};
  c.workers = 0;
  expect(c, "workers");
  c = ExperimentConfig{};
  c.replicas = 0;
  expect(c, "replicas");
  c = ExperimentConfig{};
  c.moving_average_window = 0;
  expect(c, "moving_average_window");
  c = ExperimentConfig{};
  c.ci_level = 1.0;
  expect(c, "ci_level");
  c = ExperimentConfig{};
  c.agent.mutation_probability = 2.0;
  expect(c, "agent.mutation_probability");
}

TEST(MakeBenchmarkTest, Descriptors) {
  EXPECT_EQ(MakeBenchmark("learn_to_count:4")->space().cardinalities(),
            (std::vector<std::size_t>{4, 4, 4, 4}));
  EXPECT_EQ(MakeBenchmark("sparse:cards=10x10x10,seed=3")
                ->space()
                .CardinalityAtMost(1u << 20),
            1000u);
  EXPECT_EQ(MakeBenchmark("text_mock")->space().length(), 20u);
  for (const char* bad : {"", "learn_to_count", "learn_to_count:0",
                          "learn_to_count:x", "sparse:cards=", "nope:1",
                          "sparse:cards=3x3,frac_invalid=2"}) {
    EXPECT_THROW(MakeBenchmark(bad), Error) << bad;
  }
}

TEST(RunReplicaTest, RandomAgentSmallSpace) {
  ExperimentConfig c = Experiment("learn_to_count/random", "learn_to_count:3", 27);
  const auto benchmark = MakeBenchmark(c.benchmark);
  const TrialLog log = RunReplica(c, *benchmark, 0);
  ASSERT_EQ(log.records.size(), 27u);
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const TrialRecord& r = log.records[i];
    EXPECT_GT(r.result.reward, 0.0);
    EXPECT_LE(r.result.reward, 1.0);
    EXPECT_EQ(r.completion_index, i + 1);
    EXPECT_EQ(r.proposal_index, i + 1);
    EXPECT_EQ(r.result.reward, benchmark->Evaluate(r.result.genotype));
  }
}

bool SameLog(const TrialLog& a, const TrialLog& b) {
  if (a.seed != b.seed || a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const TrialRecord& x = a.records[i];
    const TrialRecord& y = b.records[i];
    if (x.result.trial_id != y.result.trial_id ||
        x.result.genotype != y.result.genotype ||
        std::memcmp(&x.result.reward, &y.result.reward, sizeof(double)) != 0 ||
        x.result.parent_id != y.result.parent_id ||
        x.proposal_index != y.proposal_index ||
        x.completion_index != y.completion_index ||
        x.num_mutated != y.num_mutated) {
      return false;
    }
  }
  return true;
}

class PresetReplicaTest : public ::testing::TestWithParam<const char*> {};

TEST_P(PresetReplicaTest, SingleWorkerRunsAreBitIdentical) {
  ExperimentConfig c = Experiment(GetParam(), "learn_to_count:5", 150);
  c.agent.hidden_size = 8;
  c.base_seed = 99;
  const auto benchmark = MakeBenchmark(c.benchmark);
  EXPECT_TRUE(SameLog(RunReplica(c, *benchmark, 2), RunReplica(c, *benchmark, 2)));
  EXPECT_FALSE(SameLog(RunReplica(c, *benchmark, 2), RunReplica(c, *benchmark, 3)));
}

TEST_P(PresetReplicaTest, ParallelWorkersKeepLogInvariants) {
  ExperimentConfig c = Experiment(GetParam(), "learn_to_count:5", 120);
  c.agent.hidden_size = 8;
  c.workers = 6;
  c.evaluation_duration = 1.0;
  const auto benchmark = MakeBenchmark(c.benchmark);
  const TrialLog log = RunReplica(c, *benchmark, 0);
  ASSERT_EQ(log.records.size(), 120u);
  std::vector<std::size_t> completion, proposal;
  for (const TrialRecord& r : log.records) {
    completion.push_back(r.completion_index);
    proposal.push_back(r.proposal_index);
    // Parents must have completed before the child was proposed.
    if (r.result.parent_id) {
      EXPECT_LT(*r.result.parent_id, r.result.trial_id);
    }
  }
  std::vector<std::size_t> expected(120);
  std::iota(expected.begin(), expected.end(), 1);
  EXPECT_EQ(completion, expected);
  std::sort(proposal.begin(), proposal.end());
  EXPECT_EQ(proposal, expected);
  EXPECT_TRUE(SameLog(log, RunReplica(c, *benchmark, 0)));

  const MetricSeries m = ComputeMetrics(log, 10);
  for (std::size_t i = 1; i < m.best_so_far.size(); ++i) {
    EXPECT_GE(m.best_so_far[i], m.best_so_far[i - 1]);
  }
}

TEST_P(PresetReplicaTest, RealThreadsObserveEveryTrial) {
  ExperimentConfig c = Experiment(GetParam(), "learn_to_count:5", 80);
  c.agent.hidden_size = 8;
  c.workers = 4;
  c.real_threads = true;
  const auto benchmark = MakeBenchmark(c.benchmark);
  const TrialLog log = RunReplica(c, *benchmark, 0);
  ASSERT_EQ(log.records.size(), 80u);
  std::vector<std::size_t> ids;
  for (const TrialRecord& r : log.records) {
    ids.push_back(r.result.trial_id);
    EXPECT_EQ(r.result.reward, benchmark->Evaluate(r.result.genotype));
  }
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(ids[i], i + 1);
}

INSTANTIATE_TEST_SUITE_P(
    Presets, PresetReplicaTest,
    ::testing::Values("learn_to_count/random", "learn_to_count/evolutionary",
                      "learn_to_count/neural_pqt",
                      "learn_to_count/neural_reinforce",
                      "learn_to_count/evo_nas_pqt",
                      "learn_to_count/evo_nas_reinforce"));

// Rejects one specific genotype to exercise error propagation.
class FailingBenchmark final : public Benchmark {
 public:
  FailingBenchmark() : space_(SearchSpace::FromCardinalities({2, 2})) {}
  const SearchSpace& space() const override { return space_; }
  double Evaluate(const Genotype& g) const override {
    if (g.values == std::vector<std::size_t>{1, 1}) {
      throw Error(ErrorCode::kInvalidArgument, "evaluator refused");
    }
    return 0.5;
  }
  std::string Describe() const override { return "failing"; }

 private:
  SearchSpace space_;
};

TEST(RunReplicaTest, BenchmarkErrorsCarryTrialContext) {
  ExperimentConfig c = Experiment("learn_to_count/random", "unused", 200);
  FailingBenchmark benchmark;
  ExpectError([&] { RunReplica(c, benchmark, 0); },
              ErrorCode::kInvalidArgument, "(1;1): evaluator refused");
  c.real_threads = true;
  c.workers = 3;
  ExpectError([&] { RunReplica(c, benchmark, 0); },
              ErrorCode::kInvalidArgument, "evaluator refused");
}

TEST(RunReplicaTest, SpaceMismatchIsConfigError) {
  ExperimentConfig c = Experiment("learn_to_count/random", "learn_to_count:3", 10);
  c.space_cardinalities = std::vector<std::size_t>{3, 3};
  const auto benchmark = MakeBenchmark(c.benchmark);
  ExpectError([&] { RunReplica(c, *benchmark, 0); }, ErrorCode::kConfig,
              "space_cardinalities");
}

TEST(RunComparisonTest, IdenticalConfigsGiveIdenticalAggregates) {
  const ExperimentConfig c =
      Experiment("learn_to_count/random", "learn_to_count:4", 100);
  const auto benchmark = MakeBenchmark(c.benchmark);
  const ComparisonReport report =
      RunComparison({{"a", c}, {"b", c}}, *benchmark, 3);
  ASSERT_EQ(report.entries.size(), 2u);
  const AggregateSeries& a = *report.entries[0].aggregate;
  const AggregateSeries& b = *report.entries[1].aggregate;
  for (std::size_t i = 0; i < a.moving_average.size(); ++i) {
    EXPECT_EQ(a.moving_average[i].mean, b.moving_average[i].mean);
    EXPECT_EQ(a.best_so_far[i].sem, b.best_so_far[i].sem);
  }
  EXPECT_EQ(PairedWinFraction(report.entries[0], report.entries[1],
                              Metric::kMovingAverage, 99),
            1.0);
  EXPECT_EQ(PairedWinFraction(report.entries[0], report.entries[1],
                              Metric::kMovingAverage, 99, true),
            0.0);
}

TEST(RunComparisonTest, RejectsDifferentTrialCounts) {
  const ExperimentConfig a =
      Experiment("learn_to_count/random", "learn_to_count:4", 100);
  ExperimentConfig b = a;
  b.total_trials = 50;
  const auto benchmark = MakeBenchmark(a.benchmark);
  EXPECT_THROW(RunComparison({{"a", a}, {"b", b}}, *benchmark, 2), Error);
}

TEST(RunComparisonTest, EvolutionaryBeatsRandomBestSoFar) {
  const ExperimentConfig random =
      Experiment("learn_to_count/random", "learn_to_count:10", 5000);
  const ExperimentConfig evolutionary =
      Experiment("learn_to_count/evolutionary", "learn_to_count:10", 5000);
  const auto benchmark = MakeBenchmark(random.benchmark);
  const ComparisonReport report = RunComparison(
      {{"evolutionary", evolutionary}, {"random", random}}, *benchmark, 20);
  const double wins = PairedWinFraction(report.entries[0], report.entries[1],
                                        Metric::kBestSoFar, 4999, true);
  EXPECT_GE(wins * 20, 18.0);
}

TEST(RunComparisonTest, RandomSearchOnSparseLandscape) {
  // 1,000 genotypes, 30% invalid, valid rewards plateau + U[-spread, spread]:
  // mean reward 0.7 * 0.85 = 0.595.
  const ExperimentConfig c = Experiment(
      "nasbench/random",
      "sparse:cards=10x10x10,seed=5,frac_invalid=0.3,plateau=0.85,spread=0.05",
      300);
  const auto benchmark = MakeBenchmark(c.benchmark);
  const ComparisonReport report = RunComparison({{"random", c}}, *benchmark, 20);
  std::size_t reached = 0;
  for (const MetricSeries& s : report.entries[0].series) {
    if (s.best_so_far[99] > 0.85 - 0.05) ++reached;
  }
  EXPECT_GE(reached, 18u);
  const AggregateSeries& a = *report.entries[0].aggregate;
  for (std::size_t i = 49; i < a.moving_average.size(); ++i) {
    EXPECT_LT(a.moving_average[i].mean, 0.85 * 0.7 + 0.05);
  }
}

}  // namespace
}  // namespace evonas
