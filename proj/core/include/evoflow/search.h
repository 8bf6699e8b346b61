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

// Grammar-guided genetic programming: derivation-tree genotypes, decoding to
// linear workflows, and the variation and replacement operators.

#ifndef EVOFLOW_SEARCH_H_
#define EVOFLOW_SEARCH_H_

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "evoflow/evaluation_record.h"
#include "evoflow/grammar.h"

namespace evoflow::search {

using Rng = std::mt19937_64;
using grammar::AlgorithmId;
using grammar::Grammar;

inline constexpr int kDefaultMaxDerivations = 13;
inline constexpr int kCrossoverRetries = 10;
inline constexpr int kMutationRetries = 10;

using ParamValue = std::variant<std::int64_t, double, std::string>;

std::string FormatParam(const ParamValue& value);

struct WorkflowStep {
  AlgorithmId algorithm;
  std::map<std::string, ParamValue> hyperparams;

  // Typed accessors; fall back to `fallback` when absent or of another type.
  std::int64_t GetInt(const std::string& name, std::int64_t fallback) const;
  double GetReal(const std::string& name, double fallback) const;
  std::string GetString(const std::string& name,
                        const std::string& fallback) const;

  bool operator==(const WorkflowStep&) const = default;
};

// Phenotype: ordered preprocessing steps followed by one classifier.
struct WorkflowSpec {
  std::vector<WorkflowStep> steps;
  std::string canonical_key;

  const AlgorithmId& classifier() const { return steps.back().algorithm; }
  bool Contains(std::string_view algorithm) const;
  bool operator==(const WorkflowSpec&) const = default;
};

// `name(k=v,...)` per step joined with `|`; keys sorted, reals in shortest
// round-trip form.
std::string CanonicalKey(const std::vector<WorkflowStep>& steps);
WorkflowSpec MakeWorkflow(std::vector<WorkflowStep> steps);

struct DerivationNode {
  enum class Kind { kStructural, kAlgorithm, kCategorical, kNumeric };

  Kind kind = Kind::kStructural;
  std::string symbol;  // rule name, or algorithm id for kAlgorithm
  std::vector<DerivationNode> children;  // kStructural only
  std::string category;                  // kCategorical
  double number = 0.0;                   // kNumeric
  bool integer = false;                  // kNumeric

  bool IsNonTerminal() const { return kind != Kind::kAlgorithm; }
  bool operator==(const DerivationNode&) const = default;
};

struct DerivationTree {
  DerivationNode root;

  // Structural production applications; value selections count 0.
  int DerivationCount() const;
  bool operator==(const DerivationTree&) const = default;
};

// True when every node matches the grammar and the derivation cap holds.
bool IsValid(const DerivationTree& tree, const Grammar& g, int max_derivations);

struct Individual {
  DerivationTree tree;
  WorkflowSpec workflow;
  std::optional<evaluation::EvaluationRecord> evaluation;

  double fitness() const { return evaluation ? evaluation->fitness : 0.0; }
  double eval_time() const { return evaluation ? evaluation->eval_time : 0.0; }
};

// (fitness desc, eval_time asc, index asc). Both must be evaluated.
bool IsBetter(const Individual& a, std::size_t index_a, const Individual& b,
              std::size_t index_b);
// Index of the best individual of a non-empty evaluated population.
std::size_t BestIndex(std::span<const Individual> population);
std::size_t WorstIndex(std::span<const Individual> population);

WorkflowSpec Decode(const DerivationTree& tree);

// Grows a random tree of at most `max_derivations` derivations. Throws
// InvalidArgument when no derivation fits the budget.
DerivationTree RandomTree(const Grammar& g, int max_derivations, Rng& rng);
Individual RandomIndividual(const Grammar& g, int max_derivations, Rng& rng);

// Binary tournament with replacement; returns the index of the winner.
std::size_t TournamentSelect(std::span<const Individual> population, Rng& rng);

// Swaps one same-symbol subtree between the parents. Falls back to copies of
// the parents when no common non-terminal exists or every retry breaks the
// derivation cap. Children are unevaluated.
std::pair<Individual, Individual> Crossover(const Individual& p1,
                                            const Individual& p2,
                                            const Grammar& g,
                                            int max_derivations, Rng& rng);

// Regrows one uniformly chosen non-terminal subtree. The result is
// unevaluated.
Individual Mutate(const Individual& ind, const Grammar& g, int max_derivations,
                  Rng& rng);

// Elitist generational replacement. Throws InvalidArgument on size mismatch.
std::vector<Individual> Replace(std::span<const Individual> population,
                                std::vector<Individual> offspring);

}  // namespace evoflow::search

#endif  // EVOFLOW_SEARCH_H_
