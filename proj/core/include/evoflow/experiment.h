// Copyright 2026 The EvoFlow Authors.
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

// Batch experiments: dataset ingestion, baseline runs, simulated-profile
// sweeps and their aggregate reports.

#ifndef EVOFLOW_EXPERIMENT_H_
#define EVOFLOW_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evoflow/engine.h"
#include "evoflow/json.h"
#include "evoflow/ml.h"
#include "evoflow/simusers.h"

namespace evoflow::experiment {

namespace fs = std::filesystem;

inline constexpr std::string_view kBaselineProfile = "baseline";

// Header row, numeric feature columns, last column the class label. Class ids
// follow the sorted label strings. Throws InvalidArgument with the line number
// on malformed input.
ml::Dataset ReadCsv(const fs::path& path);
ml::Dataset ParseCsv(std::string_view text, std::string name);

struct Split {
  ml::Dataset train;
  ml::Dataset test;
};

// Stratified split with ceil(n/3) test rows allocated to classes by largest
// remainder. Throws InvalidArgument if the training part has a single class.
Split SplitDataset(const ml::Dataset& data, std::uint64_t seed);
Split LoadDataset(const fs::path& path, std::uint64_t seed);
// Pre-split files; the test labels are mapped through the training classes.
Split LoadPreSplit(const fs::path& train, const fs::path& test);

// key=value lines with EngineConfig field names; '#' starts a comment.
engine::EngineConfig ParseConfig(std::string_view text, engine::EngineConfig base = {});
engine::EngineConfig LoadConfig(const fs::path& path, engine::EngineConfig base = {});

struct ExperimentResult {
  std::string dataset;
  std::string profile;  // profile id or "baseline"
  std::uint64_t seed = 0;
  search::WorkflowSpec archive;
  evaluation::EvaluationRecord archive_record;
  double test_balanced_accuracy = 0.0;
  std::vector<double> timeline;  // executed generations + 1 entries
  int first_interaction_generation = 0;
  double wall_time_seconds = 0.0;
  std::vector<engine::InteractionRecord> interactions;
  std::string error;  // non-empty when the run failed
};

Json ToJson(const ExperimentResult& r);
ExperimentResult ResultFromJson(const Json& j);

// Refits the workflow on the whole training part and scores the test part.
// Failures score 0.
double TestBalancedAccuracy(const search::WorkflowSpec& workflow, const Split& split,
                            std::uint64_t seed);

using ClockFactory = std::function<std::shared_ptr<evaluation::Clock>()>;

// Runs with interactions disabled. With `out_dir`, writes run.jsonl and
// result.json there.
ExperimentResult RunBaseline(const Split& split, engine::EngineConfig config,
                             std::uint64_t seed, const std::optional<fs::path>& out_dir,
                             const ClockFactory& clock = nullptr);

struct SweepOptions {
  std::vector<fs::path> datasets;
  std::vector<simusers::Profile> profiles;
  int repeats = 1;
  std::uint64_t base_seed = 0;
  engine::EngineConfig config;  // interaction fields come from the schedule
  std::optional<fs::path> out_dir;
  int jobs = 1;
  ClockFactory clock;
};

// For every (dataset, repeat) runs the baseline and each profile with seed
// base_seed + repeat. Results are ordered by dataset, seed, then baseline
// followed by the profiles in the given order. Failed runs carry `error`.
std::vector<ExperimentResult> RunSweep(const SweepOptions& options);

struct FitnessRow {
  std::string dataset;  // "all" aggregates every dataset
  std::string profile;
  int runs = 0;
  double mean_fitness = 0.0;
  double delta_vs_baseline = 0.0;
  double mean_test_accuracy = 0.0;
};

struct SpeedupRow {
  std::string dataset;
  std::string profile;
  int runs = 0;
  double speedup_q1 = 0.0;
  double speedup_median = 0.0;
  double speedup_q3 = 0.0;
  double time_ratio_median = 0.0;  // interactive window / baseline window
};

struct Report {
  std::vector<FitnessRow> fitness;
  std::vector<SpeedupRow> speedup;
  std::vector<ExperimentResult> runs;
};

// Aggregates per (dataset, profile) and per profile over all datasets.
// Speedups pair each run with the baseline of the same dataset and seed.
Report BuildReport(std::vector<ExperimentResult> results);
// Every result.json below `dir`. Throws InvalidArgument if none exist.
std::vector<ExperimentResult> LoadResults(const fs::path& dir);
// fitness.csv, speedup.csv, runs.csv and report.txt.
void WriteReport(const Report& report, const fs::path& out_dir);
std::string FormatReport(const Report& report);

}  // namespace evoflow::experiment

#endif  // EVOFLOW_EXPERIMENT_H_
