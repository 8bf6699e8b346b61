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

// Independent reference implementations shared by unit and acceptance tests.

#ifndef EVOFLOW_TESTS_ORACLES_H_
#define EVOFLOW_TESTS_ORACLES_H_

#include <random>
#include <set>
#include <string>
#include <variant>

#include "evoflow/grammar.h"
#include "evoflow/interaction.h"
#include "evoflow/search.h"

namespace evoflow::testing {

struct RandomSnapshotCase {
  grammar::Grammar grammar;
  interaction::InteractionSnapshot snapshot;
  interaction::Thresholds thresholds;
};

// Random grammar (default grammar with a few random removals), random
// workflows with random fitness and time, and random thresholds, each axis
// disabled with probability 1/4.
inline RandomSnapshotCase RandomSnapshot(std::mt19937_64& rng) {
  RandomSnapshotCase c;
  c.grammar = grammar::DefaultGrammar();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int removals = static_cast<int>(rng() % 4);
  for (int r = 0; r < removals; ++r) {
    const auto removable = grammar::GetRemovableSymbols(c.grammar);
    if (rng() % 2 == 0 && !removable.algorithms.empty()) {
      auto it = removable.algorithms.begin();
      std::advance(it, static_cast<long>(rng() % removable.algorithms.size()));
      c.grammar = grammar::RemoveAlgorithm(c.grammar, *it);
    } else if (!removable.values.empty()) {
      auto it = removable.values.begin();
      std::advance(it, static_cast<long>(rng() % removable.values.size()));
      c.grammar = grammar::RemoveHyperparameterValue(c.grammar, *it);
    }
  }
  // Workflows come from the unpruned grammar so some use removed symbols.
  search::Rng tree_rng(rng());
  const std::size_t n = 1 + rng() % 40;
  for (std::size_t i = 0; i < n; ++i) {
    interaction::SnapshotIndividual ind;
    ind.workflow = search::RandomIndividual(grammar::DefaultGrammar(), 13, tree_rng).workflow;
    ind.record.fitness = unit(rng);
    ind.record.eval_time = 5.0 * unit(rng);
    ind.record.classifier = ind.workflow.classifier();
    ind.generation = static_cast<int>(rng() % 10);
    c.snapshot.individuals.push_back(std::move(ind));
  }
  if (rng() % 4 != 0) c.thresholds.t_acc = unit(rng);
  if (rng() % 4 != 0) c.thresholds.t_time = 5.0 * unit(rng);
  return c;
}

// Every symbol of the grammar that (a) occurs in some worst-region workflow,
// (b) occurs in no best-region workflow and (c) can be removed alone while
// keeping the grammar valid. Written from scratch over raw workflow steps.
inline interaction::Candidates CandidateOracle(const RandomSnapshotCase& c) {
  const auto& inds = c.snapshot.individuals;
  const auto in_best = [&](const interaction::SnapshotIndividual& ind) {
    const bool acc = !c.thresholds.t_acc.has_value() || ind.record.fitness > *c.thresholds.t_acc;
    const bool time =
        !c.thresholds.t_time.has_value() || ind.record.eval_time < *c.thresholds.t_time;
    return acc && time;
  };
  const auto uses_algorithm = [](const search::WorkflowSpec& w, const std::string& a) {
    for (const auto& s : w.steps)
      if (s.algorithm == a) return true;
    return false;
  };
  const auto uses_value = [](const search::WorkflowSpec& w, const grammar::HyperparamValueId& v) {
    for (const auto& s : w.steps) {
      if (s.algorithm != v.algorithm) continue;
      const auto it = s.hyperparams.find(v.hyperparam);
      if (it == s.hyperparams.end()) continue;
      const auto* text = std::get_if<std::string>(&it->second);
      if (text != nullptr && *text == v.value) return true;
    }
    return false;
  };
  const auto legal = [&](auto remove) {
    try {
      return grammar::Validate(remove()).empty();
    } catch (const std::exception&) {
      return false;
    }
  };

  interaction::Candidates out;
  for (const auto& info : c.grammar.algorithms()) {
    bool worst = false, best = false;
    for (const auto& ind : inds) {
      if (!uses_algorithm(ind.workflow, info.id)) continue;
      (in_best(ind) ? best : worst) = true;
    }
    if (worst && !best && legal([&] { return grammar::RemoveAlgorithm(c.grammar, info.id); })) {
      out.algorithms.insert(info.id);
    }
  }
  for (const auto& rule : c.grammar.rules()) {
    if (rule.kind != grammar::RuleKind::kCategorical) continue;
    const auto sep = rule.name.find("::");
    for (const auto& value : rule.values) {
      const grammar::HyperparamValueId v{rule.name.substr(0, sep), rule.name.substr(sep + 2), value};
      bool worst = false, best = false;
      for (const auto& ind : inds) {
        if (!uses_value(ind.workflow, v)) continue;
        (in_best(ind) ? best : worst) = true;
      }
      if (worst && !best &&
          legal([&] { return grammar::RemoveHyperparameterValue(c.grammar, v); })) {
        out.hyperparameter_values.insert(v);
      }
    }
  }
  return out;
}

}  // namespace evoflow::testing

#endif  // EVOFLOW_TESTS_ORACLES_H_
