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

// Context-free workflow grammar: parsing, validation, rendering and pruning.
//
// Grammar text holds one production per logical line:
//
//   workflow ::= pipeline
//   pipeline ::= preproc pipeline | classifier
//   classifier ::= kNN <kNN_hp> | gaussianNB <gaussianNB_hp>
//   <kNN_hp> ::= kNN::n_neighbors kNN::weights
//   kNN::n_neighbors ::= int(1, 30)
//   kNN::weights ::= cat(uniform, distance)
//
// A line starting with `|` continues the previous production and `#` starts
// a comment. Every symbol with a definition is a non-terminal. `<...>` and
// `x::y` symbols must be defined; any other bare symbol is an algorithm
// terminal. The first production defines the root.

#ifndef EVOFLOW_GRAMMAR_H_
#define EVOFLOW_GRAMMAR_H_

#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace evoflow::grammar {

using AlgorithmId = std::string;
using Alternative = std::vector<std::string>;

// Non-terminal holding the classifier alternatives.
inline constexpr std::string_view kClassifierSymbol = "classifier";

enum class RuleKind { kStructural, kCategorical, kInteger, kReal };

struct Rule {
  std::string name;
  RuleKind kind = RuleKind::kStructural;
  std::vector<Alternative> alternatives;  // kStructural
  std::vector<std::string> values;        // kCategorical
  double lo = 0.0;                        // kInteger, kReal
  double hi = 0.0;

  bool IsValueRule() const { return kind != RuleKind::kStructural; }
  bool operator==(const Rule&) const = default;
};

enum class AlgorithmKind { kPreprocessor, kClassifier };

std::string_view ToString(AlgorithmKind kind);

// One categorical value of one hyperparameter, rendered "alg::hp=value".
struct HyperparamValueId {
  AlgorithmId algorithm;
  std::string hyperparam;
  std::string value;

  std::string ToString() const;
  // Throws InvalidArgument on malformed text.
  static HyperparamValueId Parse(std::string_view text);

  auto operator<=>(const HyperparamValueId&) const = default;
};

enum class TerminalKind { kAlgorithmName, kCategoricalValue, kNumericRange };

struct TerminalSymbol {
  std::string id;
  TerminalKind kind = TerminalKind::kAlgorithmName;
  double lo = 0.0;
  double hi = 0.0;
  bool integer = false;

  auto operator<=>(const TerminalSymbol&) const = default;
};

struct AlgorithmInfo {
  AlgorithmId id;
  AlgorithmKind kind = AlgorithmKind::kPreprocessor;
  std::string choice_rule;  // rule holding the alternative with `id`
  std::string hp_block;     // empty when the algorithm has no hyperparameters
  std::vector<std::string> hp_rules;  // value rules, in block order
};

// Immutable grammar value. Lookup tables are rebuilt on construction.
class Grammar {
 public:
  Grammar() = default;
  // Builds a grammar from rules without validating it; `rules.front()` is the
  // root. Call Validate() to inspect the result.
  explicit Grammar(std::vector<Rule> rules);

  const std::string& root() const { return root_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const Rule* Find(std::string_view name) const;

  bool IsNonTerminal(std::string_view name) const;
  bool IsAlgorithm(std::string_view name) const;

  // Algorithms in grammar order.
  const std::vector<AlgorithmInfo>& algorithms() const { return algorithms_; }
  const AlgorithmInfo* FindAlgorithm(std::string_view id) const;
  std::vector<AlgorithmId> Classifiers() const;
  std::vector<AlgorithmId> Preprocessors() const;

  // Owning algorithm of a value rule, empty if none.
  std::string OwnerOf(std::string_view value_rule) const;
  // Value rule for (algorithm, hyperparam), or nullptr.
  const Rule* FindHyperparameter(std::string_view algorithm,
                                 std::string_view hyperparam) const;

  // Every terminal: algorithm names, categorical values ("alg::hp=value") and
  // numeric ranges (keyed by their rule name).
  std::set<TerminalSymbol> Terminals() const;
  std::set<std::string> NonTerminals() const;

  // Minimum number of structural derivations needed to fully expand `symbol`.
  // Structural rules cost 1 per application; value rules and terminals cost 0.
  // Returns kUnproductive for symbols that cannot derive a terminal string.
  int MinDerivations(std::string_view symbol) const;
  int MinDerivations(const Alternative& alternative) const;
  static constexpr int kUnproductive = 1 << 28;

  // Canonical text; ParseGrammar(Render()) == *this.
  std::string Render() const;

  bool operator==(const Grammar& other) const {
    return rules_ == other.rules_;
  }

 private:
  void BuildIndex();

  std::string root_;
  std::vector<Rule> rules_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<AlgorithmInfo> algorithms_;
  std::unordered_map<std::string, std::size_t> algorithm_index_;
  std::unordered_map<std::string, std::string> value_owner_;
  std::unordered_map<std::string, int> min_cost_;
};

// Parses grammar text. Throws GrammarSyntaxError, UndefinedSymbolError, or
// GrammarViolationError when the parsed grammar fails Validate().
Grammar ParseGrammar(std::string_view text);

// Every violated grammar invariant, as readable messages. Empty iff valid.
std::vector<std::string> Validate(const Grammar& g);

// Returns a copy of `g` without algorithm `a`, its hyperparameter block and
// every hyperparameter rule of that block. Alternatives that can no longer be
// completed are dropped, as are rules no longer reachable from the root.
// Throws GrammarViolationError for unknown algorithms or when the result would
// be invalid (for example, removing the last classifier).
Grammar RemoveAlgorithm(const Grammar& g, const AlgorithmId& a);

// Returns a copy of `g` without one categorical value. Throws
// GrammarViolationError for unknown values and for the last remaining value.
Grammar RemoveHyperparameterValue(const Grammar& g, const HyperparamValueId& v);

struct RemovableSymbols {
  std::set<AlgorithmId> algorithms;
  std::set<HyperparamValueId> values;
};

// Symbols whose individual removal keeps the grammar valid.
RemovableSymbols GetRemovableSymbols(const Grammar& g);

// Text and parsed value of the shipped 10 + 10 algorithm grammar.
std::string_view DefaultGrammarText();
const Grammar& DefaultGrammar();

}  // namespace evoflow::grammar

#endif  // EVOFLOW_GRAMMAR_H_
