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

#include "evoflow/search.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "evoflow/errors.h"
#include "evoflow/util.h"

namespace evoflow::search {
namespace {

using grammar::Rule;
using grammar::RuleKind;
using Kind = DerivationNode::Kind;
using Path = std::vector<std::size_t>;

std::size_t UniformIndex(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

int Count(const DerivationNode& node) {
  if (node.kind != Kind::kStructural) return 0;
  int total = 1;
  for (const auto& child : node.children) total += Count(child);
  return total;
}

DerivationNode Grow(const Grammar& g, const std::string& symbol, int budget,
                    Rng& rng) {
  DerivationNode node;
  node.symbol = symbol;
  if (g.IsAlgorithm(symbol)) {
    node.kind = Kind::kAlgorithm;
    return node;
  }
  const Rule* rule = g.Find(symbol);
  if (rule == nullptr) throw InvalidArgument("unknown symbol '" + symbol + "'");
  switch (rule->kind) {
    case RuleKind::kCategorical:
      if (rule->values.empty()) {
        throw InvalidArgument("hyperparameter '" + symbol + "' has no values");
      }
      node.kind = Kind::kCategorical;
      node.category = rule->values[UniformIndex(rule->values.size(), rng)];
      return node;
    case RuleKind::kInteger: {
      node.kind = Kind::kNumeric;
      node.integer = true;
      const auto lo = static_cast<std::int64_t>(std::ceil(rule->lo));
      const auto hi = static_cast<std::int64_t>(std::floor(rule->hi));
      node.number = static_cast<double>(
          std::uniform_int_distribution<std::int64_t>(lo, hi)(rng));
      return node;
    }
    case RuleKind::kReal:
      node.kind = Kind::kNumeric;
      node.number = rule->lo == rule->hi
                        ? rule->lo
                        : std::uniform_real_distribution<double>(
                              rule->lo, rule->hi)(rng);
      return node;
    case RuleKind::kStructural:
      break;
  }
  std::vector<std::size_t> feasible;
  for (std::size_t a = 0; a < rule->alternatives.size(); ++a) {
    if (1 + g.MinDerivations(rule->alternatives[a]) <= budget) {
      feasible.push_back(a);
    }
  }
  if (feasible.empty()) {
    throw InvalidArgument("no derivation of '" + symbol + "' fits within " +
                          std::to_string(budget) + " derivations");
  }
  const auto& alt = rule->alternatives[feasible[UniformIndex(feasible.size(), rng)]];
  node.kind = Kind::kStructural;
  int slack = budget - 1 - g.MinDerivations(alt);
  for (const std::string& child_symbol : alt) {
    const int min_child = g.MinDerivations(child_symbol);
    DerivationNode child = Grow(g, child_symbol, min_child + slack, rng);
    slack -= Count(child) - min_child;
    node.children.push_back(std::move(child));
  }
  return node;
}

bool NodeValid(const DerivationNode& node, const Grammar& g) {
  if (node.kind == Kind::kAlgorithm) return g.IsAlgorithm(node.symbol);
  const Rule* rule = g.Find(node.symbol);
  if (rule == nullptr) return false;
  switch (node.kind) {
    case Kind::kCategorical:
      return rule->kind == RuleKind::kCategorical &&
             std::find(rule->values.begin(), rule->values.end(),
                       node.category) != rule->values.end();
    case Kind::kNumeric:
      if (rule->kind == RuleKind::kInteger) {
        return node.integer && node.number == std::round(node.number) &&
               node.number >= rule->lo && node.number <= rule->hi;
      }
      return rule->kind == RuleKind::kReal && !node.integer &&
             node.number >= rule->lo && node.number <= rule->hi;
    case Kind::kStructural: {
      if (rule->kind != RuleKind::kStructural) return false;
      const bool matches = std::any_of(
          rule->alternatives.begin(), rule->alternatives.end(),
          [&](const grammar::Alternative& alt) {
            if (alt.size() != node.children.size()) return false;
            for (std::size_t i = 0; i < alt.size(); ++i) {
              if (alt[i] != node.children[i].symbol) return false;
            }
            return true;
          });
      if (!matches) return false;
      return std::all_of(node.children.begin(), node.children.end(),
                         [&](const DerivationNode& c) { return NodeValid(c, g); });
    }
    case Kind::kAlgorithm:
      break;
  }
  return false;
}

void CollectNonTerminals(const DerivationNode& node, Path& path,
                         std::vector<Path>& out) {
  if (!node.IsNonTerminal()) return;
  out.push_back(path);
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(i);
    CollectNonTerminals(node.children[i], path, out);
    path.pop_back();
  }
}

std::vector<Path> NonTerminalPaths(const DerivationTree& tree) {
  std::vector<Path> out;
  Path path;
  CollectNonTerminals(tree.root, path, out);
  return out;
}

DerivationNode& At(DerivationNode& root, const Path& path) {
  DerivationNode* node = &root;
  for (std::size_t i : path) node = &node->children[i];
  return *node;
}

const DerivationNode& At(const DerivationNode& root, const Path& path) {
  const DerivationNode* node = &root;
  for (std::size_t i : path) node = &node->children[i];
  return *node;
}

Individual FromTree(DerivationTree tree) {
  Individual ind;
  ind.workflow = Decode(tree);
  ind.tree = std::move(tree);
  return ind;
}

Individual Unevaluated(const Individual& ind) {
  Individual copy = ind;
  copy.evaluation.reset();
  return copy;
}

void DecodeNode(const DerivationNode& node, std::vector<WorkflowStep>& steps) {
  switch (node.kind) {
    case Kind::kAlgorithm:
      steps.push_back({node.symbol, {}});
      return;
    case Kind::kCategorical:
    case Kind::kNumeric: {
      if (steps.empty()) return;
      const auto pos = node.symbol.rfind("::");
      const std::string name = pos == std::string::npos
                                   ? node.symbol
                                   : node.symbol.substr(pos + 2);
      ParamValue value;
      if (node.kind == Kind::kCategorical) {
        value = node.category;
      } else if (node.integer) {
        value = static_cast<std::int64_t>(std::llround(node.number));
      } else {
        value = node.number;
      }
      steps.back().hyperparams[name] = std::move(value);
      return;
    }
    case Kind::kStructural:
      for (const auto& child : node.children) DecodeNode(child, steps);
      return;
  }
}

}  // namespace

std::string FormatParam(const ParamValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&value)) return util::FormatDouble(*d);
  return std::get<std::string>(value);
}

std::int64_t WorkflowStep::GetInt(const std::string& name,
                                  std::int64_t fallback) const {
  const auto it = hyperparams.find(name);
  if (it == hyperparams.end()) return fallback;
  if (const auto* i = std::get_if<std::int64_t>(&it->second)) return *i;
  if (const auto* d = std::get_if<double>(&it->second))
    return static_cast<std::int64_t>(std::llround(*d));
  return fallback;
}

double WorkflowStep::GetReal(const std::string& name, double fallback) const {
  const auto it = hyperparams.find(name);
  if (it == hyperparams.end()) return fallback;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&it->second))
    return static_cast<double>(*i);
  return fallback;
}

std::string WorkflowStep::GetString(const std::string& name,
                                    const std::string& fallback) const {
  const auto it = hyperparams.find(name);
  if (it == hyperparams.end()) return fallback;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  return fallback;
}

bool WorkflowSpec::Contains(std::string_view algorithm) const {
  return std::any_of(steps.begin(), steps.end(), [&](const WorkflowStep& s) {
    return s.algorithm == algorithm;
  });
}

std::string CanonicalKey(const std::vector<WorkflowStep>& steps) {
  std::vector<std::string> parts;
  parts.reserve(steps.size());
  for (const WorkflowStep& step : steps) {
    std::vector<std::string> params;
    for (const auto& [name, value] : step.hyperparams) {  // std::map: sorted
      params.push_back(name + "=" + FormatParam(value));
    }
    parts.push_back(step.algorithm + "(" + util::Join(params, ",") + ")");
  }
  return util::Join(parts, "|");
}

WorkflowSpec MakeWorkflow(std::vector<WorkflowStep> steps) {
  WorkflowSpec spec;
  spec.canonical_key = CanonicalKey(steps);
  spec.steps = std::move(steps);
  return spec;
}

int DerivationTree::DerivationCount() const { return Count(root); }

bool IsValid(const DerivationTree& tree, const Grammar& g, int max_derivations) {
  return tree.root.symbol == g.root() &&
         tree.DerivationCount() <= max_derivations && NodeValid(tree.root, g);
}

bool IsBetter(const Individual& a, std::size_t index_a, const Individual& b,
              std::size_t index_b) {
  const auto order = evaluation::CompareQuality(*a.evaluation, *b.evaluation);
  if (order != std::partial_ordering::equivalent) {
    return order == std::partial_ordering::less;
  }
  return index_a < index_b;
}

std::size_t BestIndex(std::span<const Individual> population) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < population.size(); ++i) {
    if (IsBetter(population[i], i, population[best], best)) best = i;
  }
  return best;
}

std::size_t WorstIndex(std::span<const Individual> population) {
  std::size_t worst = 0;
  for (std::size_t i = 1; i < population.size(); ++i) {
    if (IsBetter(population[worst], worst, population[i], i)) worst = i;
  }
  return worst;
}

WorkflowSpec Decode(const DerivationTree& tree) {
  std::vector<WorkflowStep> steps;
  DecodeNode(tree.root, steps);
  return MakeWorkflow(std::move(steps));
}

DerivationTree RandomTree(const Grammar& g, int max_derivations, Rng& rng) {
  if (g.MinDerivations(g.root()) > max_derivations) {
    throw InvalidArgument("grammar needs at least " +
                          std::to_string(g.MinDerivations(g.root())) +
                          " derivations, budget is " +
                          std::to_string(max_derivations));
  }
  return DerivationTree{Grow(g, g.root(), max_derivations, rng)};
}

Individual RandomIndividual(const Grammar& g, int max_derivations, Rng& rng) {
  return FromTree(RandomTree(g, max_derivations, rng));
}

std::size_t TournamentSelect(std::span<const Individual> population, Rng& rng) {
  if (population.empty()) throw InvalidArgument("tournament on empty population");
  const std::size_t a = UniformIndex(population.size(), rng);
  const std::size_t b = UniformIndex(population.size(), rng);
  return IsBetter(population[a], a, population[b], b) ? a : b;
}

std::pair<Individual, Individual> Crossover(const Individual& p1,
                                            const Individual& p2,
                                            const Grammar& g,
                                            int max_derivations, Rng& rng) {
  (void)g;
  const auto paths1 = NonTerminalPaths(p1.tree);
  const auto paths2 = NonTerminalPaths(p2.tree);
  std::set<std::string> symbols1;
  for (const auto& p : paths1) symbols1.insert(At(p1.tree.root, p).symbol);
  std::set<std::string> common;
  for (const auto& p : paths2) {
    const auto& sym = At(p2.tree.root, p).symbol;
    if (symbols1.count(sym)) common.insert(sym);
  }
  if (common.empty()) return {Unevaluated(p1), Unevaluated(p2)};
  const std::vector<std::string> choices(common.begin(), common.end());
  const bool identical = p1.tree == p2.tree;

  for (int attempt = 0; attempt < kCrossoverRetries; ++attempt) {
    const std::string& symbol = choices[UniformIndex(choices.size(), rng)];
    std::vector<const Path*> c1, c2;
    for (const auto& p : paths1)
      if (At(p1.tree.root, p).symbol == symbol) c1.push_back(&p);
    for (const auto& p : paths2)
      if (At(p2.tree.root, p).symbol == symbol) c2.push_back(&p);
    const Path& a = *c1[UniformIndex(c1.size(), rng)];
    // Identical parents exchange the same branch.
    const Path& b = identical ? a : *c2[UniformIndex(c2.size(), rng)];

    DerivationTree t1 = p1.tree;
    DerivationTree t2 = p2.tree;
    std::swap(At(t1.root, a), At(t2.root, b));
    if (t1.DerivationCount() <= max_derivations &&
        t2.DerivationCount() <= max_derivations) {
      return {FromTree(std::move(t1)), FromTree(std::move(t2))};
    }
  }
  return {Unevaluated(p1), Unevaluated(p2)};
}

Individual Mutate(const Individual& ind, const Grammar& g, int max_derivations,
                  Rng& rng) {
  const auto paths = NonTerminalPaths(ind.tree);
  if (paths.empty()) return Unevaluated(ind);
  const int total = ind.tree.DerivationCount();
  for (int attempt = 0; attempt < kMutationRetries; ++attempt) {
    const Path& path = paths[UniformIndex(paths.size(), rng)];
    const DerivationNode& target = At(ind.tree.root, path);
    const int budget = max_derivations - (total - Count(target));
    if (g.MinDerivations(target.symbol) > budget) continue;
    DerivationTree tree = ind.tree;
    At(tree.root, path) = Grow(g, target.symbol, budget, rng);
    return FromTree(std::move(tree));
  }
  return Unevaluated(ind);
}

std::vector<Individual> Replace(std::span<const Individual> population,
                                std::vector<Individual> offspring) {
  if (population.size() != offspring.size()) {
    throw InvalidArgument("replacement needs equal population and offspring sizes");
  }
  if (population.empty()) return offspring;
  const std::size_t elite = BestIndex(population);
  const std::size_t best_child = BestIndex(offspring);
  if (evaluation::IsBetter(*population[elite].evaluation,
                           *offspring[best_child].evaluation)) {
    offspring[WorstIndex(offspring)] = population[elite];
  }
  return offspring;
}

}  // namespace evoflow::search
