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

#ifndef EVONAS_REPORTING_H_
#define EVONAS_REPORTING_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evonas/orchestrator.h"

namespace evonas {

// Trial log CSV: replica, completion_index, trial_id, genotype, reward,
// best_so_far, parent_id, n_mutated. Genotypes are ';'-joined 0-based indices.
std::string TrialCsv(const TrialLog& log);

// Reads a trial CSV back. Only the fields stored in the file are restored.
// Throws Error(kParse) with the line number on malformed input.
TrialLog ParseTrialCsv(std::string_view text);

// Per-index statistics for reporting. With a single replica the s.e.m. and
// CI half-width are NaN (written as empty CSV fields).
AggregateSeries AggregateForReport(std::span<const MetricSeries> series,
                                   double ci_level);

// completion_index, mean_ma, sem_ma, ci_halfwidth_ma, mean_best, sem_best,
// ci_halfwidth_best.
std::string AggregateCsv(const AggregateSeries& aggregate);

struct NamedAggregate {
  std::string name;
  AggregateSeries aggregate;
};

// Long-form data for a two-panel plot (moving average, best so far):
// panel, agent, completion_index, mean, lower, upper.
std::string PlotDataCsv(std::span<const NamedAggregate> aggregates);

struct SummaryRow {
  std::string name;
  std::size_t replicas = 0;
  PointStats final_moving_average;
  PointStats final_best;
};

SummaryRow FinalSummary(const std::string& name, const AggregateSeries& aggregate,
                        std::size_t replicas);

// Fixed-width table with "mean ± 2 sem" cells.
std::string SummaryTable(std::span<const SummaryRow> rows);
// Same numbers in CSV form.
std::string SummaryCsv(std::span<const SummaryRow> rows);

// File name fragment for an agent or preset name ("a/b" -> "a_b").
std::string SanitizeName(std::string_view name);

struct OutputFile {
  std::string relative_path;
  std::string contents;
};

// Writes every file under `dir`, creating directories as needed. Files are
// first written to a sibling staging directory, then moved in place, so a
// failure leaves no partial output.
void WriteOutputs(const std::filesystem::path& dir,
                  const std::vector<OutputFile>& files);

const char* CodeVersion();

}  // namespace evonas

#endif  // EVONAS_REPORTING_H_
