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

// Acceptance checks. Usage: acceptance [criterion ...]; with no arguments
// every criterion runs. Prints one PASS/FAIL line per criterion and exits
// nonzero if any failed.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "evonas/agents.h"
#include "evonas/benchmarks.h"
#include "evonas/orchestrator.h"
#include "evonas/policy_net.h"
#include "evonas/random.h"
#include "evonas/search_space.h"
#include "test_util.h"

namespace evonas {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string Fixed(double value, int digits = 4) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// 1. Reward oracle.
Outcome RewardOracle() {
  const auto start = Clock::now();
  bool optimum_ok = true;
  for (std::int64_t n = 1; n <= 100; ++n) {
    std::vector<std::int64_t> values(static_cast<std::size_t>(n));
    std::iota(values.begin(), values.end(), 1);
    if (LearnToCountRewardFromValues(values) != 1.0) optimum_ok = false;
  }
  bool unique_ok = true;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<std::int64_t> expected(n);
    std::iota(expected.begin(), expected.end(), 1);
    const auto maximizers = EnumerateLearnToCountMaximizers(n);
    if (maximizers.size() != 1 || maximizers[0] != expected) unique_ok = false;
  }
  const double elapsed = Seconds(start);
  return {optimum_ok && unique_ok && elapsed < 60.0,
          std::string("reward(1..n)=1 for n<=100: ") +
              (optimum_ok ? "yes" : "no") + "; unique maximizer n<=6: " +
              (unique_ok ? "yes" : "no") + "; " + Fixed(elapsed, 2) + " s"};
}

// 2. Gradient correctness against central differences.
Outcome GradientCorrectness() {
  const auto start = Clock::now();
  constexpr double kTolerance = 1e-4;
  std::vector<std::pair<std::string, testing::GradientCheck>> checks;

  const SearchSpace small = SearchSpace::FromCardinalities({3, 3});
  {
    const PolicyParams params = InitRandomPolicy(small, 3, 101, 0.7);
    const Genotype g{{2, 0}};
    checks.emplace_back(
        "log-likelihood",
        testing::CheckGradient(
            params, LogLikelihoodAndGrad(params, small, g).gradient,
            [&](const PolicyParams& p) {
              return LogLikelihoodAndGrad(p, small, g).value;
            },
            1e-5, kTolerance));
  }
  {
    const SearchSpace space = SearchSpace::FromCardinalities({3, 2, 3});
    const PolicyParams params = InitRandomPolicy(space, 3, 102, 0.7);
    std::vector<ScoredTrace> batch(2);
    batch[0].trace.genotype = Genotype{{1, 0, 2}};
    batch[0].trace.mutated_mask = {true, false, true};
    batch[0].reward = 0.9;
    batch[1].trace.genotype = Genotype{{0, 1, 1}};
    batch[1].trace.mutated_mask = {true, true, true};
    batch[1].reward = 0.2;
    checks.emplace_back(
        "reinforce+entropy",
        testing::CheckGradient(
            params, ReinforceObjective(params, space, batch, 0.4, 0.3).gradient,
            [&](const PolicyParams& p) {
              return ReinforceObjective(p, space, batch, 0.4, 0.3).value;
            },
            1e-5, kTolerance));
  }
  {
    const PolicyParams params = InitRandomPolicy(small, 3, 103, 0.7);
    const std::vector<Genotype> queue = {Genotype{{0, 1}}, Genotype{{2, 2}},
                                         Genotype{{1, 0}}};
    checks.emplace_back(
        "pqt+entropy",
        testing::CheckGradient(
            params, PqtObjective(params, small, queue, 0.2).gradient,
            [&](const PolicyParams& p) {
              return PqtObjective(p, small, queue, 0.2).value;
            },
            1e-5, kTolerance));
  }
  bool passed = true;
  std::string detail;
  for (const auto& [name, check] : checks) {
    passed = passed && check.passed && check.parameters <= 200;
    char errors[96];
    std::snprintf(errors, sizeof(errors), "max rel err %.2e, max abs err %.2e",
                  check.max_relative_error, check.max_absolute_error);
    detail += name + " (" + std::to_string(check.parameters) + " params, " +
              errors + ") ";
  }
  const double elapsed = Seconds(start);
  passed = passed && elapsed < 60.0;
  return {passed, detail + "tolerance 1e-4; " + Fixed(elapsed, 2) + " s"};
}

// Genotype histogram of `draws` agent proposals from a one-entry population.
std::map<Genotype, std::uint64_t> ChildHistogram(AgentKind kind, double p,
                                                 Seed seed, int draws) {
  AgentConfig c;
  c.kind = kind;
  c.mutation_probability = p;
  c.population_size = 1;
  c.tournament_size = 1;
  c.hidden_size = 8;
  c.seed = seed;
  Agent agent(c, SearchSpace::FromCardinalities({3, 3}));
  TrialResult parent;
  parent.trial_id = 1;
  parent.genotype = Genotype{{1, 2}};
  parent.reward = 0.5;
  agent.Observe(parent);
  std::map<Genotype, std::uint64_t> counts;
  for (int i = 0; i < draws; ++i) ++counts[agent.Propose(2 + i).genotype];
  return counts;
}

// 3. Degeneration identities.
Outcome DegenerationIdentities() {
  const auto start = Clock::now();
  constexpr double kAlpha = 0.01;
  constexpr int kDraws = 50000;

  // (a) p = 0 copies the parent, for trained and untrained networks alike.
  bool copies = true;
  {
    AgentConfig c = *FindPreset("learn_to_count/evo_nas_pqt");
    c.mutation_probability = 0.0;
    c.hidden_size = 8;
    const LearnToCountBenchmark benchmark(6);
    Agent agent(c, benchmark.space());
    std::map<TrialId, Genotype> genotypes;
    for (TrialId id = 1; id <= 1000; ++id) {
      const Proposal p = agent.Propose(id);
      genotypes[id] = p.genotype;
      if (p.parent_id && (p.genotype != genotypes.at(*p.parent_id) ||
                          p.num_mutated != 0)) {
        copies = false;
      }
      TrialResult r;
      r.trial_id = id;
      r.genotype = p.genotype;
      r.reward = benchmark.Evaluate(p.genotype);
      r.parent_id = p.parent_id;
      agent.Observe(r);
    }
    const SearchSpace space = SearchSpace::FromCardinalities({3, 3});
    const PolicyParams params = InitRandomPolicy(space, 8, 7, 1.0);
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
      const Genotype parent = space.UniformSample(rng);
      if (MutateSequence(params, space, parent, 0.0, rng).genotype != parent) {
        copies = false;
      }
    }
  }

  // (b) p = 1 with arbitrary parameters matches the plain sampler.
  double p_full = 0.0;
  {
    const SearchSpace space = SearchSpace::FromCardinalities({3, 3});
    const PolicyParams params = InitRandomPolicy(space, 8, 9, 1.5);
    Rng rng_a(10);
    Rng rng_b(11);
    std::map<Genotype, std::uint64_t> mutated, sampled;
    const Genotype parent{{0, 2}};
    for (int i = 0; i < kDraws; ++i) {
      ++mutated[MutateSequence(params, space, parent, 1.0, rng_a).genotype];
      ++sampled[SampleSequence(params, space, rng_b).genotype];
    }
    p_full = testing::ChiSquareTwoSample(mutated, sampled);
  }

  // (c) Untrained Evo-NAS mutation matches Evolutionary mutation.
  double p_03 = testing::ChiSquareTwoSample(
      ChildHistogram(AgentKind::kEvoNas, 0.3, 21, kDraws),
      ChildHistogram(AgentKind::kEvolutionary, 0.3, 22, kDraws));
  double p_05 = testing::ChiSquareTwoSample(
      ChildHistogram(AgentKind::kEvoNas, 0.5, 23, kDraws),
      ChildHistogram(AgentKind::kEvolutionary, 0.5, 24, kDraws));

  const double elapsed = Seconds(start);
  const bool passed = copies && p_full > kAlpha && p_03 > kAlpha &&
                      p_05 > kAlpha && elapsed < 300.0;
  return {passed, std::string("(a) p=0 copies: ") + (copies ? "yes" : "no") +
                      "; (b) p=1 vs sampler p-value " + Fixed(p_full) +
                      "; (c) vs evolutionary p-value " + Fixed(p_03) +
                      " (p=0.3), " + Fixed(p_05) + " (p=0.5); alpha 0.01; " +
                      Fixed(elapsed, 2) + " s"};
}

// 4. Population and queue contents against brute-force references.
Outcome PopulationQueueInvariants() {
  const auto start = Clock::now();
  constexpr TrialId kTrials = 1000;
  bool population_ok = true;
  for (std::size_t capacity : {1u, 10u, 50u, 500u}) {
    Population population(capacity);
    std::vector<TrialResult> stream;
    Rng rng(capacity);
    for (TrialId id = 1; id <= kTrials; ++id) {
      TrialResult r;
      r.trial_id = id;
      r.genotype = Genotype{{static_cast<std::size_t>(rng.UniformInt(5))}};
      r.reward = static_cast<double>(rng.UniformInt(10)) / 10.0;
      population.Add(r);
      stream.push_back(r);
      const std::size_t keep = std::min(capacity, stream.size());
      if (population.size() != keep) population_ok = false;
      for (std::size_t i = 0; i < population.size() && population_ok; ++i) {
        if (population.entries()[i].trial_id !=
            stream[stream.size() - keep + i].trial_id) {
          population_ok = false;
        }
      }
    }
  }

  bool queue_ok = true;
  const auto better = [](const TrialResult& a, const TrialResult& b) {
    if (a.reward != b.reward) return a.reward > b.reward;
    return a.trial_id < b.trial_id;
  };
  for (std::optional<std::size_t> capacity :
       {std::optional<std::size_t>(1), std::optional<std::size_t>(5),
        std::optional<std::size_t>(50), std::optional<std::size_t>()}) {
    for (bool dedup : {false, true}) {
      PriorityQueue queue(capacity, dedup);
      std::vector<TrialResult> kept;
      Rng rng(capacity.value_or(0) * 2 + dedup + 100);
      for (TrialId id = 1; id <= kTrials; ++id) {
        TrialResult r;
        r.trial_id = id;
        r.genotype = Genotype{{static_cast<std::size_t>(rng.UniformInt(60))}};
        r.reward = static_cast<double>(rng.UniformInt(12)) / 12.0;
        queue.Offer(r);
        const bool duplicate =
            dedup && std::any_of(kept.begin(), kept.end(),
                                 [&](const TrialResult& k) {
                                   return k.genotype == r.genotype;
                                 });
        if (!duplicate) {
          kept.push_back(r);
          std::sort(kept.begin(), kept.end(), better);
          if (capacity && kept.size() > *capacity) kept.resize(*capacity);
        }
        const auto got = queue.Entries();
        if (got.size() != kept.size()) {
          queue_ok = false;
          break;
        }
        for (std::size_t i = 0; i < got.size(); ++i) {
          if (got[i].trial_id != kept[i].trial_id) queue_ok = false;
        }
        // Top-K views of an unbounded queue.
        if (!capacity && !dedup && id % 100 == 0) {
          for (std::size_t k : {1u, 5u, 50u}) {
            const auto top = queue.Top(k);
            for (std::size_t i = 0; i < top.size(); ++i) {
              if (top[i].trial_id != kept[i].trial_id) queue_ok = false;
            }
          }
        }
      }
    }
  }
  const double elapsed = Seconds(start);
  return {population_ok && queue_ok && elapsed < 60.0,
          std::string("aging population: ") + (population_ok ? "match" : "MISMATCH") +
              "; top-K queue with ties: " + (queue_ok ? "match" : "MISMATCH") +
              "; " + Fixed(elapsed, 2) + " s"};
}

double MeanAt(const ComparisonEntry& e, Metric metric, std::size_t index) {
  double sum = 0.0;
  for (const MetricSeries& s : e.series) {
    sum += metric == Metric::kMovingAverage ? s.moving_average[index]
                                            : s.best_so_far[index];
  }
  return sum / static_cast<double>(e.series.size());
}

// 5. Agent ordering on learn-to-count.
Outcome AgentOrdering() {
  const auto start = Clock::now();
  constexpr std::size_t kTrials = 5000;
  constexpr std::size_t kReplicas = 20;
  const std::vector<std::string> names = {
      "random", "evolutionary", "neural_pqt", "evo_nas_pqt", "neural_reinforce"};
  std::vector<std::pair<std::string, ExperimentConfig>> configs;
  for (const std::string& name : names) {
    ExperimentConfig c;
    c.agent = *FindPreset("learn_to_count/" + name);
    c.benchmark = "learn_to_count:10";
    c.total_trials = kTrials;
    configs.emplace_back(name, c);
  }
  const auto benchmark = MakeBenchmark("learn_to_count:10");
  const ComparisonReport report = RunComparison(configs, *benchmark, kReplicas);
  std::map<std::string, const ComparisonEntry*> by_name;
  for (const ComparisonEntry& e : report.entries) by_name[e.name] = &e;
  const auto& random = *by_name.at("random");
  const auto& evolutionary = *by_name.at("evolutionary");
  const auto& neural = *by_name.at("neural_pqt");
  const auto& evo_nas = *by_name.at("evo_nas_pqt");
  const auto& reinforce = *by_name.at("neural_reinforce");
  constexpr std::size_t kLast = kTrials - 1;

  const double ma_random = MeanAt(random, Metric::kMovingAverage, kLast);
  const double ma_evolutionary = MeanAt(evolutionary, Metric::kMovingAverage, kLast);
  const double ma_neural = MeanAt(neural, Metric::kMovingAverage, kLast);
  const double ma_evo_nas = MeanAt(evo_nas, Metric::kMovingAverage, kLast);
  const double ma_reinforce = MeanAt(reinforce, Metric::kMovingAverage, kLast);

  const bool a = ma_random < ma_evolutionary && ma_random < ma_neural &&
                 ma_random < ma_evo_nas;
  const double b_frac =
      PairedWinFraction(evolutionary, neural, Metric::kBestSoFar, 999);
  const bool b = b_frac >= 0.70;
  const double c_random =
      PairedWinFraction(evo_nas, random, Metric::kMovingAverage, kLast);
  const double c_evolutionary =
      PairedWinFraction(evo_nas, evolutionary, Metric::kMovingAverage, kLast);
  const double c_neural =
      PairedWinFraction(evo_nas, neural, Metric::kMovingAverage, kLast);
  const bool c = c_random >= 0.70 && c_evolutionary >= 0.70 && c_neural >= 0.70;
  const bool d = ma_neural > ma_reinforce;

  const auto mark = [](bool ok) { return ok ? "ok" : "FAILED"; };
  return {a && b && c && d,
          std::string("final MA random ") + Fixed(ma_random) + ", evolutionary " +
              Fixed(ma_evolutionary) + ", neural_pqt " + Fixed(ma_neural) +
              ", evo_nas_pqt " + Fixed(ma_evo_nas) + ", neural_reinforce " +
              Fixed(ma_reinforce) + "; (a) " + mark(a) +
              "; (b) evolutionary>=neural_pqt best@1000 in " +
              Fixed(100 * b_frac, 0) + "% " + mark(b) +
              "; (c) evo_nas_pqt>= random/evolutionary/neural_pqt in " +
              Fixed(100 * c_random, 0) + "/" + Fixed(100 * c_evolutionary, 0) +
              "/" + Fixed(100 * c_neural, 0) + "% " + mark(c) + "; (d) " +
              mark(d) + "; " + Fixed(Seconds(start), 1) + " s"};
}

// 6. Random search on a sparse landscape.
Outcome SparseLandscape() {
  const auto start = Clock::now();
  constexpr std::size_t kReplicas = 20;
  constexpr std::size_t kTrials = 500;
  constexpr double kMean = 0.595;
  constexpr double kBand = 0.05;
  ExperimentConfig c;
  c.agent = *FindPreset("nasbench/random");
  c.benchmark =
      "sparse:cards=10x10x10,seed=1,frac_invalid=0.3,plateau=0.85,spread=0.05";
  c.total_trials = kTrials;
  const auto benchmark = MakeBenchmark(c.benchmark);
  const ComparisonReport report =
      RunComparison({{"random", c}}, *benchmark, kReplicas);
  const ComparisonEntry& entry = report.entries[0];
  std::size_t reached = 0;
  for (const MetricSeries& s : entry.series) {
    if (s.best_so_far[99] > 0.80) ++reached;
  }
  // The window has filled from index `window` on.
  double worst = 0.0;
  for (std::size_t t = c.moving_average_window - 1; t < kTrials; ++t) {
    worst = std::max(worst,
                     std::abs(MeanAt(entry, Metric::kMovingAverage, t) - kMean));
  }
  const bool best_ok = reached * 10 >= kReplicas * 9;
  const bool band_ok = worst <= kBand;
  return {best_ok && band_ok,
          "best>0.80 by trial 100 in " + std::to_string(reached) + "/" +
              std::to_string(kReplicas) + " replicas; replica-mean MA max |dev| "
              "from 0.595 = " + Fixed(worst) + " (band 0.05); " +
              Fixed(Seconds(start), 2) + " s"};
}

// 7. Growth of E[1/r] with n.
Outcome InverseRewardTrend() {
  const auto start = Clock::now();
  std::vector<double> x, y;
  for (std::size_t n = 2; n <= 6; ++n) {
    const Rational m = InverseRewardMean(n);
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(std::log(static_cast<double>(m.numerator()) /
                         static_cast<double>(m.denominator())));
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double alpha = sxy / sxx;
  const double elapsed = Seconds(start);
  return {alpha >= 1.5 && alpha <= 2.5 && elapsed < 60.0,
          "log-log slope over n=2..6 = " + Fixed(alpha) +
              " (required [1.5, 2.5]); " + Fixed(elapsed, 2) + " s"};
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// 8. Byte-identical CLI output.
Outcome Determinism() {
  const fs::path root = fs::temp_directory_path() /
                        ("evonas_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string base = std::string(EVONAS_CLI_PATH) +
                           " run --preset learn_to_count/evo_nas_pqt --n 10 "
                           "--trials 400 --replicas 3 --seed 2026 --out ";
  int failures = 0;
  for (const char* name : {"first", "second"}) {
    const std::string command =
        base + (root / name).string() + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++failures;
  }
  std::size_t compared = 0, identical = 0;
  if (failures == 0) {
    for (const auto& entry : fs::directory_iterator(root / "first")) {
      if (entry.path().extension() != ".csv") continue;
      ++compared;
      const fs::path other = root / "second" / entry.path().filename();
      if (fs::exists(other) && ReadFile(entry.path()) == ReadFile(other)) {
        ++identical;
      }
    }
  }
  fs::remove_all(root);
  return {failures == 0 && compared >= 4 && identical == compared,
          std::to_string(identical) + "/" + std::to_string(compared) +
              " CSV files byte-identical across two runs"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace evonas

int main(int argc, char** argv) {
  using evonas::Criterion;
  const std::vector<Criterion> criteria = {
      {1, "reward oracle", evonas::RewardOracle},
      {2, "gradient correctness", evonas::GradientCorrectness},
      {3, "degeneration identities", evonas::DegenerationIdentities},
      {4, "population/queue invariants", evonas::PopulationQueueInvariants},
      {5, "agent ordering", evonas::AgentOrdering},
      {6, "sparse-landscape dynamics", evonas::SparseLandscape},
      {7, "inverse-reward growth", evonas::InverseRewardTrend},
      {8, "determinism", evonas::Determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    evonas::Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %d %s: %s\n", outcome.passed ? "PASS" : "FAIL", c.id,
                c.name, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.passed) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
