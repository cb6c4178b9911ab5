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

#include "evonas/reporting.h"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <unistd.h>

#include "evonas/error.h"
#include "evonas/format.h"

namespace evonas {
namespace {

constexpr std::string_view kTrialHeader =
    "replica,completion_index,trial_id,genotype,reward,best_so_far,parent_id,"
    "n_mutated";

std::string FormatOptional(double value) {
  return std::isnan(value) ? std::string() : FormatDouble(value);
}

Error ParseError(std::size_t line, const std::string& message) {
  return Error(ErrorCode::kParse,
               "trial csv line " + std::to_string(line) + ": " + message);
}

std::string FormatCell(const PointStats& s) {
  char buffer[64];
  if (std::isnan(s.sem)) {
    std::snprintf(buffer, sizeof(buffer), "%.4f", s.mean);
  } else {
    std::snprintf(buffer, sizeof(buffer), "%.4f ± %.4f", s.mean, 2.0 * s.sem);
  }
  return buffer;
}

}  // namespace

std::string TrialCsv(const TrialLog& log) {
  std::string out(kTrialHeader);
  out += '\n';
  double best = -std::numeric_limits<double>::infinity();
  for (const TrialRecord& r : log.records) {
    best = std::max(best, r.result.reward);
    out += std::to_string(log.replica) + ',' +
           std::to_string(r.completion_index) + ',' +
           std::to_string(r.result.trial_id) + ',' +
           FormatGenotype(r.result.genotype) + ',' +
           FormatDouble(r.result.reward) + ',' + FormatDouble(best) + ',' +
           (r.result.parent_id ? std::to_string(*r.result.parent_id) : "") +
           ',' + std::to_string(r.num_mutated) + '\n';
  }
  return out;
}

TrialLog ParseTrialCsv(std::string_view text) {
  TrialLog log;
  std::size_t line_number = 0;
  bool have_replica = false;
  std::vector<std::string_view> lines = Split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(1, "empty file");
  for (std::string_view line : lines) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_number == 1) {
      if (line != kTrialHeader) throw ParseError(1, "unexpected header");
      continue;
    }
    const std::vector<std::string_view> fields = Split(line, ',');
    if (fields.size() != 8) throw ParseError(line_number, "expected 8 fields");
    const auto replica = ParseInt(fields[0]);
    const auto completion = ParseInt(fields[1]);
    const auto trial = ParseInt(fields[2]);
    const auto reward = ParseDouble(fields[4]);
    const auto mutated = ParseInt(fields[7]);
    if (!replica || *replica < 0 || !completion || *completion < 1 || !trial ||
        !reward || !mutated || *mutated < 0) {
      throw ParseError(line_number, "bad numeric field");
    }
    if (have_replica && log.replica != static_cast<std::size_t>(*replica)) {
      throw ParseError(line_number, "mixed replicas in one file");
    }
    log.replica = static_cast<std::size_t>(*replica);
    have_replica = true;
    if (static_cast<std::size_t>(*completion) != log.records.size() + 1) {
      throw ParseError(line_number, "completion_index out of sequence");
    }
    TrialRecord record;
    record.completion_index = static_cast<std::size_t>(*completion);
    record.result.trial_id = *trial;
    record.result.reward = *reward;
    record.num_mutated = static_cast<std::size_t>(*mutated);
    for (std::string_view v : Split(fields[3], ';')) {
      const auto index = ParseInt(v);
      if (!index || *index < 0) throw ParseError(line_number, "bad genotype");
      record.result.genotype.values.push_back(static_cast<std::size_t>(*index));
    }
    if (!fields[6].empty()) {
      const auto parent = ParseInt(fields[6]);
      if (!parent) throw ParseError(line_number, "bad parent_id");
      record.result.parent_id = *parent;
    }
    log.records.push_back(std::move(record));
  }
  return log;
}

AggregateSeries AggregateForReport(std::span<const MetricSeries> series,
                                   double ci_level) {
  if (series.size() >= 2) return AggregateReplicas(series, ci_level);
  if (series.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no replicas to aggregate");
  }
  AggregateSeries out;
  out.ci_level = ci_level;
  out.z = NormalCriticalValue(ci_level);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double v : series[0].moving_average) {
    out.moving_average.push_back({v, nan, nan});
  }
  for (double v : series[0].best_so_far) out.best_so_far.push_back({v, nan, nan});
  return out;
}

std::string AggregateCsv(const AggregateSeries& aggregate) {
  std::string out =
      "completion_index,mean_ma,sem_ma,ci_halfwidth_ma,mean_best,sem_best,"
      "ci_halfwidth_best\n";
  for (std::size_t t = 0; t < aggregate.moving_average.size(); ++t) {
    const PointStats& ma = aggregate.moving_average[t];
    const PointStats& best = aggregate.best_so_far[t];
    out += std::to_string(t + 1) + ',' + FormatDouble(ma.mean) + ',' +
           FormatOptional(ma.sem) + ',' + FormatOptional(ma.ci_halfwidth) + ',' +
           FormatDouble(best.mean) + ',' + FormatOptional(best.sem) + ',' +
           FormatOptional(best.ci_halfwidth) + '\n';
  }
  return out;
}

std::string PlotDataCsv(std::span<const NamedAggregate> aggregates) {
  std::string out = "panel,agent,completion_index,mean,lower,upper\n";
  const auto emit = [&](std::string_view panel, const std::string& name,
                        const std::vector<PointStats>& stats) {
    for (std::size_t t = 0; t < stats.size(); ++t) {
      const PointStats& s = stats[t];
      const double lower = s.mean - s.ci_halfwidth;
      const double upper = s.mean + s.ci_halfwidth;
      out += std::string(panel) + ',' + name + ',' + std::to_string(t + 1) +
             ',' + FormatDouble(s.mean) + ',' + FormatOptional(lower) + ',' +
             FormatOptional(upper) + '\n';
    }
  };
  for (const NamedAggregate& a : aggregates) {
    emit("moving_average", a.name, a.aggregate.moving_average);
  }
  for (const NamedAggregate& a : aggregates) {
    emit("best_so_far", a.name, a.aggregate.best_so_far);
  }
  return out;
}

SummaryRow FinalSummary(const std::string& name, const AggregateSeries& aggregate,
                        std::size_t replicas) {
  if (aggregate.moving_average.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty aggregate");
  }
  return {name, replicas, aggregate.moving_average.back(),
          aggregate.best_so_far.back()};
}

std::string SummaryTable(std::span<const SummaryRow> rows) {
  std::size_t width = 5;
  for (const SummaryRow& r : rows) width = std::max(width, r.name.size());
  std::ostringstream out;
  const auto pad = [](std::string s, std::size_t w) {
    // The plus-minus sign is two bytes but one column.
    const std::size_t shown = s.size() - (s.find("±") != std::string::npos ? 1 : 0);
    if (shown < w) s.append(w - shown, ' ');
    return s;
  };
  out << pad("agent", width) << "  " << pad("replicas", 8) << "  "
      << pad("final moving average", 20) << "  final best\n";
  for (const SummaryRow& r : rows) {
    out << pad(r.name, width) << "  " << pad(std::to_string(r.replicas), 8)
        << "  " << pad(FormatCell(r.final_moving_average), 20) << "  "
        << FormatCell(r.final_best) << '\n';
  }
  out << "(mean ± 2 sem over replicas)\n";
  return out.str();
}

std::string SummaryCsv(std::span<const SummaryRow> rows) {
  std::string out =
      "agent,replicas,final_mean_ma,final_sem_ma,final_mean_best,"
      "final_sem_best\n";
  for (const SummaryRow& r : rows) {
    out += r.name + ',' + std::to_string(r.replicas) + ',' +
           FormatDouble(r.final_moving_average.mean) + ',' +
           FormatOptional(r.final_moving_average.sem) + ',' +
           FormatDouble(r.final_best.mean) + ',' +
           FormatOptional(r.final_best.sem) + '\n';
  }
  return out;
}

std::string SanitizeName(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                      c == '_' || c == '.';
    out += keep ? c : '_';
  }
  return out;
}

void WriteOutputs(const std::filesystem::path& dir,
                  const std::vector<OutputFile>& files) {
  namespace fs = std::filesystem;
  const fs::path target = fs::absolute(dir).lexically_normal();
  fs::path parent = target.parent_path();
  std::string stem = target.filename().string();
  if (stem.empty()) {
    stem = target.parent_path().filename().string();
    parent = target.parent_path().parent_path();
  }
  const fs::path final_dir = parent / stem;
  const fs::path staging =
      parent / ("." + stem + ".staging-" + std::to_string(::getpid()));
  std::error_code ec;
  try {
    fs::create_directories(parent);
    fs::remove_all(staging, ec);
    for (const OutputFile& f : files) {
      const fs::path path = staging / f.relative_path;
      fs::create_directories(path.parent_path());
      std::ofstream out(path, std::ios::binary);
      out << f.contents;
      if (!out.flush()) {
        throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
      }
    }
    if (!fs::exists(final_dir)) {
      fs::rename(staging, final_dir);
      return;
    }
    for (const OutputFile& f : files) {
      const fs::path path = final_dir / f.relative_path;
      fs::create_directories(path.parent_path());
      fs::rename(staging / f.relative_path, path);
    }
    fs::remove_all(staging, ec);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(staging, ec);
    throw Error(ErrorCode::kIo, e.what());
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
}

const char* CodeVersion() { return EVONAS_VERSION; }

}  // namespace evonas
