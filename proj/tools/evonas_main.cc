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

// Command-line entry point: run, compare, aggregate, oracle, gen-landscape.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "evonas/agents.h"
#include "evonas/benchmarks.h"
#include "evonas/error.h"
#include "evonas/experiment_config.h"
#include "evonas/format.h"
#include "evonas/orchestrator.h"
#include "evonas/reporting.h"

namespace evonas {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

constexpr const char* kInterleaving =
    "simulated workers; completions ordered by (finish time, proposal index); "
    "each completion is observed before its replacement is proposed";

// Errors raised while reading inputs map to kExitConfig.
struct SetupFailure {
  std::string message;
};

template <typename Fn>
auto Setup(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw SetupFailure{e.what()};
  }
}

struct SharedFlags {
  std::optional<std::size_t> n;
  std::optional<std::string> benchmark;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> replicas;
  std::optional<Seed> seed;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> window;
  std::optional<double> ci_level;
  std::vector<std::string> overrides;
  std::string out;

  void Register(CLI::App* app) {
    app->add_option("--n", n, "Learn-to-count length (benchmark learn_to_count:N)");
    app->add_option("--benchmark", benchmark,
                    "learn_to_count:N | tabular:PATH | sparse:cards=AxB[,...] | "
                    "text_mock[:SEED]");
    app->add_option("--trials", trials, "Trials per replica");
    app->add_option("--replicas", replicas, "Number of replicas");
    app->add_option("--seed", seed, "Base seed");
    app->add_option("--workers", workers, "Simulated parallel workers");
    app->add_option("--window", window, "Moving-average window");
    app->add_option("--ci", ci_level, "Confidence level of the CI band");
    app->add_option("--set", overrides, "Override a config field (dotted.key=value)");
    app->add_option("--out", out, "Output directory")->required();
  }

  void Apply(ExperimentConfig& config) const {
    if (n && benchmark) {
      throw Error(ErrorCode::kConfig, "benchmark: --n and --benchmark conflict");
    }
    if (n) config.benchmark = "learn_to_count:" + std::to_string(*n);
    if (benchmark) config.benchmark = *benchmark;
    if (trials) config.total_trials = *trials;
    if (replicas) config.replicas = *replicas;
    if (seed) config.base_seed = *seed;
    if (workers) config.workers = *workers;
    if (window) config.moving_average_window = *window;
    if (ci_level) config.ci_level = *ci_level;
    ApplyOverrides(config, overrides);
    config.Validate();
  }
};

ExperimentConfig ConfigFromPreset(const std::string& name) {
  const std::optional<AgentConfig> agent = FindPreset(name);
  if (!agent) {
    std::string known;
    for (const auto& [preset, unused] : PresetConfigs()) {
      known += (known.empty() ? "" : ", ") + preset;
    }
    throw Error(ErrorCode::kConfig,
                "preset: unknown preset '" + name + "' (known: " + known + ")");
  }
  ExperimentConfig config;
  config.agent = *agent;
  // Tabular presets have no default landscape.
  if (name.starts_with("nasbench/")) config.benchmark.clear();
  return config;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

json CiJson(double level) {
  return json{{"method", "normal"}, {"level", level},
              {"z", NormalCriticalValue(level)}};
}

std::vector<OutputFile> ReplicaOutputs(const std::string& prefix,
                                       const std::vector<TrialLog>& logs,
                                       const AggregateSeries& aggregate) {
  std::vector<OutputFile> files;
  for (const TrialLog& log : logs) {
    files.push_back({prefix + "trials_r" + std::to_string(log.replica) + ".csv",
                     TrialCsv(log)});
  }
  files.push_back({prefix + "aggregate.csv", AggregateCsv(aggregate)});
  return files;
}

json SeedsJson(const ExperimentConfig& config) {
  json replica_seeds = json::array();
  json agent_seeds = json::array();
  for (std::size_t r = 0; r < config.replicas; ++r) {
    const Seed seed = ReplicaSeed(config.base_seed, r);
    replica_seeds.push_back(seed);
    agent_seeds.push_back(DeriveSeed(seed, config.agent.seed));
  }
  return json{{"base_seed", config.base_seed},
              {"replica_seeds", replica_seeds},
              {"agent_seeds", agent_seeds}};
}

OutputFile Manifest(json body, const std::vector<OutputFile>& files) {
  json paths = json::array();
  for (const OutputFile& f : files) paths.push_back(f.relative_path);
  body["version"] = CodeVersion();
  body["files"] = paths;
  return {"manifest.json", body.dump(2) + "\n"};
}

int CmdRun(const std::optional<std::string>& preset,
           const std::optional<std::string>& config_path,
           const SharedFlags& flags) {
  const auto [config, benchmark] = Setup([&] {
    if (preset.has_value() == config_path.has_value()) {
      throw Error(ErrorCode::kConfig,
                  "preset: exactly one of --preset or --config is required");
    }
    ExperimentConfig c =
        preset ? ConfigFromPreset(*preset) : LoadExperimentConfig(*config_path);
    flags.Apply(c);
    std::unique_ptr<Benchmark> b = MakeBenchmark(c.benchmark);
    CheckBenchmarkSpace(c, *b);
    return std::pair(c, std::move(b));
  });

  std::vector<TrialLog> logs;
  std::vector<MetricSeries> series;
  for (std::size_t r = 0; r < config.replicas; ++r) {
    logs.push_back(RunReplica(config, *benchmark, r));
    series.push_back(ComputeMetrics(logs.back(), config.moving_average_window));
  }
  const AggregateSeries aggregate = AggregateForReport(series, config.ci_level);

  std::vector<OutputFile> files = ReplicaOutputs("", logs, aggregate);
  files.push_back({"config.json", SerializeExperimentConfig(config)});
  json body{{"command", "run"},
            {"preset", preset ? json(*preset) : json(nullptr)},
            {"config", ExperimentConfigToJson(config)},
            {"benchmark", benchmark->Describe()},
            {"seeds", SeedsJson(config)},
            {"ci", CiJson(config.ci_level)},
            {"interleaving", kInterleaving},
            {"start_ordinal", 1},
            {"end_ordinal", config.total_trials}};
  files.push_back(Manifest(std::move(body), files));
  WriteOutputs(flags.out, files);

  const SummaryRow row = FinalSummary(preset.value_or(config.agent.kind == AgentKind::kRandom
                                                          ? "random"
                                                          : AgentKindName(config.agent.kind)),
                                      aggregate, config.replicas);
  std::cout << SummaryTable(std::span(&row, 1));
  return kExitOk;
}

int CmdCompare(const std::vector<std::string>& presets,
               const std::vector<std::string>& config_paths,
               const SharedFlags& flags) {
  auto [configs, benchmark] = Setup([&] {
    std::vector<std::pair<std::string, ExperimentConfig>> list;
    for (const std::string& item : presets) {
      for (std::string_view name : Split(item, ',')) {
        if (name.empty()) continue;
        list.emplace_back(std::string(name), ConfigFromPreset(std::string(name)));
      }
    }
    for (const std::string& path : config_paths) {
      list.emplace_back(fs::path(path).stem().string(), LoadExperimentConfig(path));
    }
    if (list.empty()) {
      throw Error(ErrorCode::kConfig, "preset: at least one --preset or --config");
    }
    std::map<std::string, int> seen;
    for (auto& [name, config] : list) {
      if (seen[name]++ > 0) {
        throw Error(ErrorCode::kConfig, "preset: duplicate name '" + name + "'");
      }
      flags.Apply(config);
    }
    const ExperimentConfig& first = list.front().second;
    for (const auto& [name, config] : list) {
      if (config.benchmark != first.benchmark) {
        throw Error(ErrorCode::kConfig, "benchmark: '" + name + "' uses " +
                                            config.benchmark + " but '" +
                                            list.front().first + "' uses " +
                                            first.benchmark);
      }
      if (config.total_trials != first.total_trials) {
        throw Error(ErrorCode::kConfig,
                    "total_trials: differs between '" + list.front().first +
                        "' and '" + name + "'");
      }
      if (config.replicas != first.replicas) {
        throw Error(ErrorCode::kConfig,
                    "replicas: differs between '" + list.front().first +
                        "' and '" + name + "'");
      }
    }
    std::unique_ptr<Benchmark> b = MakeBenchmark(first.benchmark);
    for (const auto& [name, config] : list) CheckBenchmarkSpace(config, *b);
    return std::pair(std::move(list), std::move(b));
  });

  const std::size_t replicas = configs.front().second.replicas;
  const ComparisonReport report = RunComparison(configs, *benchmark, replicas);

  std::vector<OutputFile> files;
  std::vector<NamedAggregate> aggregates;
  std::vector<SummaryRow> rows;
  json agents = json::array();
  for (const ComparisonEntry& entry : report.entries) {
    const AggregateSeries aggregate =
        AggregateForReport(entry.series, entry.config.ci_level);
    const std::string dir = SanitizeName(entry.name) + "/";
    for (OutputFile& f : ReplicaOutputs(dir, entry.logs, aggregate)) {
      files.push_back(std::move(f));
    }
    aggregates.push_back({entry.name, aggregate});
    rows.push_back(FinalSummary(entry.name, aggregate, replicas));
    agents.push_back(json{{"name", entry.name},
                          {"directory", SanitizeName(entry.name)},
                          {"config", ExperimentConfigToJson(entry.config)},
                          {"seeds", SeedsJson(entry.config)}});
  }
  files.push_back({"plot_data.csv", PlotDataCsv(aggregates)});
  const std::string table = SummaryTable(rows);
  files.push_back({"summary.txt", table});
  files.push_back({"summary.csv", SummaryCsv(rows)});
  const ExperimentConfig& first = configs.front().second;
  json body{{"command", "compare"},
            {"benchmark", benchmark->Describe()},
            {"agents", agents},
            {"ci", CiJson(first.ci_level)},
            {"interleaving", kInterleaving},
            {"start_ordinal", 1},
            {"end_ordinal", first.total_trials}};
  files.push_back(Manifest(std::move(body), files));
  WriteOutputs(flags.out, files);
  std::cout << table;
  return kExitOk;
}

int CmdAggregate(const std::string& in_dir, std::size_t window, double ci_level,
                 const std::string& out_dir) {
  const std::vector<TrialLog> logs = Setup([&] {
    if (window < 1) {
      throw Error(ErrorCode::kConfig, "moving_average_window: must be >= 1");
    }
    if (!(ci_level >= 0.0 && ci_level < 1.0)) {
      throw Error(ErrorCode::kConfig, "ci_level: must be in [0, 1)");
    }
    if (!fs::is_directory(in_dir)) {
      throw Error(ErrorCode::kConfig, "in: not a directory: '" + in_dir + "'");
    }
    const std::regex pattern(R"(trials_r(\d+)\.csv)");
    std::map<std::size_t, fs::path> found;
    for (const fs::directory_entry& e : fs::directory_iterator(in_dir)) {
      std::smatch m;
      const std::string name = e.path().filename().string();
      if (std::regex_match(name, m, pattern)) {
        found[std::stoul(m[1].str())] = e.path();
      }
    }
    if (found.empty()) {
      throw Error(ErrorCode::kConfig, "in: no trials_r*.csv files in '" + in_dir + "'");
    }
    std::vector<TrialLog> result;
    for (const auto& [replica, path] : found) {
      TrialLog log = ParseTrialCsv(ReadFile(path));
      if (log.records.empty()) {
        throw Error(ErrorCode::kParse, path.string() + ": no trials");
      }
      if (!result.empty() && log.records.size() != result.front().records.size()) {
        throw Error(ErrorCode::kParse,
                    "LengthMismatch: " + path.string() + " has " +
                        std::to_string(log.records.size()) + " trials, expected " +
                        std::to_string(result.front().records.size()));
      }
      result.push_back(std::move(log));
    }
    return result;
  });

  std::vector<MetricSeries> series;
  for (const TrialLog& log : logs) series.push_back(ComputeMetrics(log, window));
  const AggregateSeries aggregate = AggregateForReport(series, ci_level);
  std::vector<OutputFile> files{{"aggregate.csv", AggregateCsv(aggregate)}};
  json sources = json::array();
  for (const TrialLog& log : logs) {
    sources.push_back("trials_r" + std::to_string(log.replica) + ".csv");
  }
  json body{{"command", "aggregate"},
            {"sources", sources},
            {"moving_average_window", window},
            {"ci", CiJson(ci_level)},
            {"start_ordinal", 1},
            {"end_ordinal", logs.front().records.size()}};
  files.push_back(Manifest(std::move(body), files));
  files.back().relative_path = "aggregate_manifest.json";
  WriteOutputs(out_dir, files);
  const SummaryRow row = FinalSummary("aggregate", aggregate, logs.size());
  std::cout << SummaryTable(std::span(&row, 1));
  return kExitOk;
}

// Shortest round-trip form, always with a decimal point or exponent.
std::string FormatReal(double value) {
  std::string text = FormatDouble(value);
  if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
  return text;
}

std::size_t ParseSize(const std::string& text, const std::string& what) {
  const auto value = ParseInt(text);
  if (!value || *value < 1) {
    throw Error(ErrorCode::kConfig, what + ": expected a positive integer");
  }
  return static_cast<std::size_t>(*value);
}

int CmdOracle(const std::string& what, const std::string& argument) {
  const std::string output = Setup([&]() -> std::string {
    if (what == "reward") {
      std::vector<std::int64_t> values;
      for (std::string_view part : Split(argument, ',')) {
        const auto v = ParseInt(Trim(part));
        if (!v) throw Error(ErrorCode::kConfig, "reward: bad value '" + std::string(part) + "'");
        values.push_back(*v);
      }
      return FormatReal(LearnToCountRewardFromValues(values)) + "\n";
    }
    if (what == "argmax") {
      const std::size_t n = ParseSize(argument, "argmax");
      if (n > 6) throw Error(ErrorCode::kSpaceTooLarge, "argmax: n must be <= 6");
      std::string out;
      for (const auto& seq : EnumerateLearnToCountMaximizers(n)) {
        std::string line;
        for (std::int64_t v : seq) line += (line.empty() ? "" : ",") + std::to_string(v);
        out += line + "\n";
      }
      return out;
    }
    if (what == "invmean") {
      const Rational mean = InverseRewardMean(ParseSize(argument, "invmean"));
      return std::to_string(mean.numerator()) + "/" +
             std::to_string(mean.denominator()) + " = " +
             FormatReal(static_cast<double>(mean.numerator()) /
                        static_cast<double>(mean.denominator())) +
             "\n";
    }
    throw Error(ErrorCode::kConfig,
                "oracle: unknown subcommand '" + what + "' (reward, argmax, invmean)");
  });
  std::cout << output;
  return kExitOk;
}

int CmdGenLandscape(const std::optional<std::string>& cards,
                    const std::optional<std::string>& space_path,
                    const SparseLandscapeOptions& options, const std::string& out) {
  const TabularBenchmark landscape = Setup([&] {
    if (cards.has_value() == space_path.has_value()) {
      throw Error(ErrorCode::kConfig, "space: exactly one of --cards or --space");
    }
    SearchSpace space = [&] {
      if (space_path) return LoadSpaceDefinition(*space_path);
      std::vector<std::size_t> values;
      for (std::string_view c : Split(*cards, 'x')) {
        values.push_back(ParseSize(std::string(c), "cards"));
      }
      return SearchSpace::FromCardinalities(values);
    }();
    if (!(options.frac_invalid >= 0.0 && options.frac_invalid <= 1.0)) {
      throw Error(ErrorCode::kConfig, "frac_invalid: must be in [0, 1]");
    }
    if (!(options.spread >= 0.0)) {
      throw Error(ErrorCode::kConfig, "spread: must be >= 0");
    }
    return GenerateSparseLandscape(space, options);
  });
  const fs::path path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path staging = path.string() + ".tmp";
  {
    std::ofstream file(staging, std::ios::binary);
    file << landscape.Serialize();
    if (!file.flush()) throw Error(ErrorCode::kIo, "cannot write '" + out + "'");
  }
  fs::rename(staging, path);
  std::cout << landscape.Describe() << " -> " << out << "\n";
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app("Evolutionary / neural / hybrid architecture search experiments");
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one agent configuration");
  std::optional<std::string> run_preset;
  std::optional<std::string> run_config;
  SharedFlags run_flags;
  run->add_option("--preset", run_preset, "Preset name, e.g. learn_to_count/evo_nas_pqt");
  run->add_option("--config", run_config, "Experiment config JSON file");
  run_flags.Register(run);

  auto* compare = app.add_subcommand("compare", "Run several agents on one benchmark");
  std::vector<std::string> compare_presets;
  std::vector<std::string> compare_configs;
  SharedFlags compare_flags;
  compare->add_option("--preset,--presets", compare_presets,
                      "Preset names (repeatable or comma-separated)");
  compare->add_option("--config", compare_configs, "Experiment config files");
  compare_flags.Register(compare);

  auto* aggregate = app.add_subcommand("aggregate", "Re-aggregate trial CSVs");
  std::string aggregate_in;
  std::string aggregate_out;
  std::size_t aggregate_window = 50;
  double aggregate_ci = 0.70;
  aggregate->add_option("--in", aggregate_in, "Directory with trials_r*.csv")->required();
  aggregate->add_option("--out", aggregate_out, "Output directory")->required();
  aggregate->add_option("--window", aggregate_window, "Moving-average window");
  aggregate->add_option("--ci", aggregate_ci, "Confidence level");

  auto* oracle = app.add_subcommand("oracle", "Exact learn-to-count utilities");
  std::string oracle_what;
  std::string oracle_argument;
  oracle->add_option("what", oracle_what, "reward | argmax | invmean")->required();
  oracle->add_option("argument", oracle_argument, "a1,...,an or n")->required();

  auto* gen = app.add_subcommand("gen-landscape", "Write a sparse tabular landscape");
  std::optional<std::string> gen_cards;
  std::optional<std::string> gen_space;
  SparseLandscapeOptions gen_options;
  std::string gen_out;
  gen->add_option("--cards", gen_cards, "Cardinalities, e.g. 10x10x10");
  gen->add_option("--space", gen_space, "Space definition JSON file");
  gen->add_option("--seed", gen_options.seed, "Landscape seed");
  gen->add_option("--frac-invalid", gen_options.frac_invalid, "Fraction of zero-reward genotypes");
  gen->add_option("--plateau", gen_options.plateau, "Plateau reward");
  gen->add_option("--spread", gen_options.spread, "Half-width of plateau noise");
  gen->add_option("--out", gen_out, "Output file")->required();

  app.add_subcommand("presets", "List preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return CmdRun(run_preset, run_config, run_flags);
    if (*compare) return CmdCompare(compare_presets, compare_configs, compare_flags);
    if (*aggregate) {
      return CmdAggregate(aggregate_in, aggregate_window, aggregate_ci, aggregate_out);
    }
    if (*oracle) return CmdOracle(oracle_what, oracle_argument);
    if (*gen) return CmdGenLandscape(gen_cards, gen_space, gen_options, gen_out);
    for (const auto& [name, unused] : PresetConfigs()) std::cout << name << "\n";
    return kExitOk;
  } catch (const SetupFailure& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error (" << ErrorCodeName(e.code()) << "): " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace
}  // namespace evonas

int main(int argc, char** argv) { return evonas::Main(argc, argv); }
