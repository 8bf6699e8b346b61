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

#include "evoflow/interaction.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "evoflow/errors.h"

namespace evoflow::interaction {

void Thresholds::Check() const {
  if (t_acc && !(*t_acc >= 0.0 && *t_acc <= 1.0)) {
    throw InvalidArgument("t_acc must be in [0, 1]");
  }
  if (t_time && !(*t_time >= 0.0 && std::isfinite(*t_time))) {
    throw InvalidArgument("t_time must be a non-negative number of seconds");
  }
}

std::string_view ToString(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::kPreprocessor:
      return "Preprocessor";
    case SymbolKind::kClassifier:
      return "Classifier";
    case SymbolKind::kHyperparamValue:
      return "HyperparamValue";
  }
  return "Unknown";
}

SymbolKind ParseSymbolKind(std::string_view text) {
  for (auto kind : {SymbolKind::kPreprocessor, SymbolKind::kClassifier,
                    SymbolKind::kHyperparamValue}) {
    if (ToString(kind) == text) return kind;
  }
  throw InvalidArgument("unknown symbol kind '" + std::string(text) + "'");
}

WorkflowSymbols SymbolsOf(const search::WorkflowSpec& workflow) {
  WorkflowSymbols out;
  for (const auto& step : workflow.steps) {
    out.algorithms.insert(step.algorithm);
    for (const auto& [name, value] : step.hyperparams) {
      if (const auto* category = std::get_if<std::string>(&value)) {
        out.values.insert({step.algorithm, name, *category});
      }
    }
  }
  return out;
}

std::vector<SymbolStats> ComputeStats(const std::vector<SnapshotIndividual>& individuals) {
  std::map<std::pair<SymbolKind, std::string>, std::vector<const SnapshotIndividual*>> groups;
  for (const auto& ind : individuals) {
    for (std::size_t i = 0; i < ind.workflow.steps.size(); ++i) {
      const auto& step = ind.workflow.steps[i];
      const bool last = i + 1 == ind.workflow.steps.size();
      groups[{last ? SymbolKind::kClassifier : SymbolKind::kPreprocessor, step.algorithm}]
          .push_back(&ind);
    }
    for (const auto& value : SymbolsOf(ind.workflow).values) {
      groups[{SymbolKind::kHyperparamValue, value.ToString()}].push_back(&ind);
    }
  }
  std::vector<SymbolStats> out;
  out.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    SymbolStats s{key.second, key.first, static_cast<int>(members.size()), 0.0, 0.0, 0.0};
    double total = 0.0;
    for (const auto* ind : members) {
      s.max_eval_time = std::max(s.max_eval_time, ind->record.eval_time);
      s.max_fitness = std::max(s.max_fitness, ind->record.fitness);
      total += ind->record.eval_time;
    }
    s.mean_eval_time = total / static_cast<double>(members.size());
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

SnapshotIndividual FromIndividual(const search::Individual& ind, int generation) {
  return {ind.workflow, ind.evaluation.value_or(evaluation::EvaluationRecord{}), generation};
}

}  // namespace

InteractionSnapshot BuildSnapshot(const engine::Session& session,
                                  const std::vector<double>* baseline_timeline) {
  if (session.status() != engine::Status::kAwaitingFeedback) {
    throw StateError(std::string("snapshot needs an AwaitingFeedback session, not ") +
                     std::string(engine::ToString(session.status())));
  }
  InteractionSnapshot snap;
  snap.generation = session.generation();
  const auto& log = session.eval_log();
  for (std::size_t i = session.snapshot_begin(); i < log.size(); ++i) {
    if (log[i].cached) continue;
    snap.individuals.push_back({log[i].workflow, log[i].record, log[i].generation});
  }
  const auto& population = session.population();
  snap.best_current = FromIndividual(population[search::BestIndex(population)],
                                     session.generation());
  // Generation of the archive's first evaluation.
  int archive_generation = 0;
  for (const auto& entry : log) {
    if (entry.workflow.canonical_key == session.archive().workflow.canonical_key) {
      archive_generation = entry.generation;
      break;
    }
  }
  snap.best_global = FromIndividual(session.archive(), archive_generation);
  snap.stats = ComputeStats(snap.individuals);
  snap.budget = {session.config().max_interactions - session.interactions_used(),
                 session.config().max_generations - session.generation()};
  const auto& timeline = session.timeline();
  for (std::size_t g = 0; g < timeline.size(); ++g) {
    DivergencePoint p{static_cast<int>(g), timeline[g], std::nullopt};
    if (baseline_timeline && g < baseline_timeline->size()) {
      p.baseline_cumulative_eval_time = (*baseline_timeline)[g];
    }
    snap.time_divergence.push_back(p);
  }
  return snap;
}

RegionPartition Partition(const InteractionSnapshot& snapshot, const Thresholds& th) {
  RegionPartition out;
  for (std::size_t i = 0; i < snapshot.individuals.size(); ++i) {
    const auto& record = snapshot.individuals[i].record;
    const bool accurate = !th.t_acc || record.fitness > *th.t_acc;
    const bool fast = !th.t_time || record.eval_time < *th.t_time;
    (accurate && fast ? out.r_best : out.r_worst).push_back(i);
  }
  return out;
}

Candidates RemovalCandidates(const InteractionSnapshot& snapshot,
                             const RegionPartition& partition, const grammar::Grammar& g) {
  std::set<grammar::AlgorithmId> best_algorithms, worst_algorithms;
  std::set<grammar::HyperparamValueId> best_values, worst_values;
  const auto collect = [&](const std::vector<std::size_t>& indices,
                           std::set<grammar::AlgorithmId>& algorithms,
                           std::set<grammar::HyperparamValueId>& values) {
    for (std::size_t i : indices) {
      auto symbols = SymbolsOf(snapshot.individuals.at(i).workflow);
      algorithms.merge(symbols.algorithms);
      values.merge(symbols.values);
    }
  };
  collect(partition.r_best, best_algorithms, best_values);
  collect(partition.r_worst, worst_algorithms, worst_values);

  const auto removable = grammar::GetRemovableSymbols(g);
  Candidates out;
  for (const auto& a : worst_algorithms) {
    if (!best_algorithms.contains(a) && removable.algorithms.contains(a)) {
      out.algorithms.insert(a);
    }
  }
  for (const auto& v : worst_values) {
    if (!best_values.contains(v) && removable.values.contains(v)) {
      out.hyperparameter_values.insert(v);
    }
  }
  return out;
}

InteractionSnapshot WithThresholds(InteractionSnapshot snapshot, const Thresholds& th,
                                   const grammar::Grammar& g) {
  th.Check();
  snapshot.thresholds = th;
  snapshot.partition = Partition(snapshot, th);
  snapshot.candidates = RemovalCandidates(snapshot, *snapshot.partition, g);
  return snapshot;
}

}  // namespace evoflow::interaction
