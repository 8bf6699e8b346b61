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

// Interaction snapshots: what a user inspects at a pause, the threshold
// partition into R_best / R_worst, and the symbols eligible for removal.

#ifndef EVOFLOW_INTERACTION_H_
#define EVOFLOW_INTERACTION_H_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evoflow/engine.h"
#include "evoflow/evaluation_record.h"
#include "evoflow/grammar.h"
#include "evoflow/search.h"
#include "evoflow/thresholds.h"

namespace evoflow::interaction {

struct SnapshotIndividual {
  search::WorkflowSpec workflow;
  evaluation::EvaluationRecord record;
  int generation = 0;

  bool operator==(const SnapshotIndividual&) const = default;
};

enum class SymbolKind { kPreprocessor, kClassifier, kHyperparamValue };
std::string_view ToString(SymbolKind kind);
// Throws InvalidArgument for unknown text.
SymbolKind ParseSymbolKind(std::string_view text);

struct SymbolStats {
  std::string symbol;  // AlgorithmId or "alg::hp=value"
  SymbolKind kind = SymbolKind::kClassifier;
  int occurrences = 0;
  double max_eval_time = 0.0;
  double mean_eval_time = 0.0;
  double max_fitness = 0.0;

  bool operator==(const SymbolStats&) const = default;
};

// Indices into the snapshot's individuals, ascending.
struct RegionPartition {
  std::vector<std::size_t> r_best;
  std::vector<std::size_t> r_worst;

  bool operator==(const RegionPartition&) const = default;
};

struct Candidates {
  std::set<grammar::AlgorithmId> algorithms;
  std::set<grammar::HyperparamValueId> hyperparameter_values;

  bool Empty() const { return algorithms.empty() && hyperparameter_values.empty(); }
  bool operator==(const Candidates&) const = default;
};

struct Budget {
  int interactions_left = 0;
  int generations_left = 0;

  bool operator==(const Budget&) const = default;
};

struct DivergencePoint {
  int generation = 0;
  double cumulative_eval_time = 0.0;
  std::optional<double> baseline_cumulative_eval_time;

  bool operator==(const DivergencePoint&) const = default;
};

struct InteractionSnapshot {
  int generation = 0;
  std::vector<SnapshotIndividual> individuals;
  SnapshotIndividual best_current;  // best of the live population
  SnapshotIndividual best_global;   // the archive
  std::vector<SymbolStats> stats;
  std::optional<Thresholds> thresholds;
  std::optional<RegionPartition> partition;
  std::optional<Candidates> candidates;
  Budget budget;
  std::vector<DivergencePoint> time_divergence;

  bool operator==(const InteractionSnapshot&) const = default;
};

// Algorithms and categorical values ("alg::hp=value") occurring in a workflow.
struct WorkflowSymbols {
  std::set<grammar::AlgorithmId> algorithms;
  std::set<grammar::HyperparamValueId> values;
};
WorkflowSymbols SymbolsOf(const search::WorkflowSpec& workflow);

// Stats for every symbol occurring in `individuals`, sorted by (kind, symbol).
std::vector<SymbolStats> ComputeStats(const std::vector<SnapshotIndividual>& individuals);

// Individuals are the non-cached evaluations since the previous interaction.
// Throws StateError unless the session awaits feedback.
InteractionSnapshot BuildSnapshot(const engine::Session& session,
                                  const std::vector<double>* baseline_timeline = nullptr);

// r_best: fitness > t_acc (if enabled) and eval_time < t_time (if enabled).
RegionPartition Partition(const InteractionSnapshot& snapshot, const Thresholds& th);

// Symbols in some r_worst workflow and in no r_best workflow, restricted to
// those removable from `g`.
Candidates RemovalCandidates(const InteractionSnapshot& snapshot,
                             const RegionPartition& partition, const grammar::Grammar& g);

// Copy of `snapshot` with thresholds, partition and candidates filled in.
InteractionSnapshot WithThresholds(InteractionSnapshot snapshot, const Thresholds& th,
                                   const grammar::Grammar& g);

}  // namespace evoflow::interaction

#endif  // EVOFLOW_INTERACTION_H_
