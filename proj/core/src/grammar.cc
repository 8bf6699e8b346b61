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

#include "evoflow/grammar.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <sstream>
#include <utility>

#include "evoflow/errors.h"
#include "evoflow/util.h"

namespace evoflow::grammar {
namespace {

bool IsBracketed(std::string_view s) {
  return s.size() >= 2 && s.front() == '<' && s.back() == '>';
}

bool IsNamespaced(std::string_view s) {
  return s.find("::") != std::string_view::npos;
}

std::string HyperparamName(std::string_view rule_name) {
  const auto pos = rule_name.rfind("::");
  return std::string(pos == std::string_view::npos ? rule_name
                                                   : rule_name.substr(pos + 2));
}

// Tokenizer over a single logical production.
class Lexer {
 public:
  Lexer(std::string_view text, int line, int column_offset)
      : text_(text), line_(line), offset_(column_offset) {}

  void SkipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }
  bool AtEnd() {
    SkipSpace();
    return pos_ >= text_.size();
  }
  bool Consume(std::string_view token) {
    SkipSpace();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }
  void Expect(std::string_view token) {
    if (!Consume(token)) Fail("expected '" + std::string(token) + "'");
  }
  char Peek() {
    SkipSpace();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  // Identifier characters: letters, digits and `_ : . -`.
  std::string Symbol() {
    SkipSpace();
    const std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '<') {
      const auto close = text_.find('>', pos_);
      if (close == std::string_view::npos) Fail("unterminated '<'");
      pos_ = close + 1;
      const auto inner = text_.substr(start + 1, close - start - 1);
      if (inner.empty() || !std::all_of(inner.begin(), inner.end(), IsIdChar)) {
        pos_ = start;
        Fail("malformed non-terminal");
      }
      return std::string(text_.substr(start, pos_ - start));
    }
    while (pos_ < text_.size() && IsIdChar(text_[pos_])) ++pos_;
    if (pos_ == start) Fail("expected a symbol");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string Value() {
    SkipSpace();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (IsIdChar(text_[pos_]) || text_[pos_] == '+'))
      ++pos_;
    if (pos_ == start) Fail("expected a value");
    return std::string(text_.substr(start, pos_ - start));
  }

  double Number() {
    const std::string token = Value();
    double out = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, out);
    if (ec != std::errc() || ptr != end) Fail("invalid number '" + token + "'");
    return out;
  }

  [[noreturn]] void Fail(const std::string& message) const {
    throw GrammarSyntaxError(message, line_,
                             offset_ + static_cast<int>(pos_) + 1);
  }

  static bool IsIdChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == ':' || c == '.' || c == '-';
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
  int offset_;
};

struct LogicalLine {
  std::string text;
  int line = 0;
};

std::vector<LogicalLine> SplitProductions(std::string_view text) {
  std::vector<LogicalLine> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) {
      if (end == text.size()) break;
      continue;
    }
    if (line[first] == '|') {
      if (out.empty()) {
        throw GrammarSyntaxError("continuation without a production", line_no,
                                 static_cast<int>(first) + 1);
      }
      out.back().text += " " + line.substr(first);
    } else {
      out.push_back({line, line_no});
    }
    if (end == text.size()) break;
  }
  return out;
}

Rule ParseProduction(const LogicalLine& line) {
  Lexer lex(line.text, line.line, 0);
  Rule rule;
  rule.name = lex.Symbol();
  lex.Expect("::=");
  const auto parse_range = [&](RuleKind kind) {
    rule.kind = kind;
    rule.lo = lex.Number();
    lex.Expect(",");
    rule.hi = lex.Number();
    lex.Expect(")");
  };
  if (lex.Consume("cat(")) {
    rule.kind = RuleKind::kCategorical;
    if (lex.Peek() != ')') {
      do {
        rule.values.push_back(lex.Value());
      } while (lex.Consume(","));
    }
    lex.Expect(")");
  } else if (lex.Consume("int(")) {
    parse_range(RuleKind::kInteger);
  } else if (lex.Consume("float(")) {
    parse_range(RuleKind::kReal);
  } else {
    rule.kind = RuleKind::kStructural;
    rule.alternatives.emplace_back();
    while (!lex.AtEnd()) {
      if (lex.Consume("|")) {
        if (rule.alternatives.back().empty()) lex.Fail("empty alternative");
        rule.alternatives.emplace_back();
        continue;
      }
      rule.alternatives.back().push_back(lex.Symbol());
    }
    if (rule.alternatives.back().empty()) lex.Fail("empty alternative");
  }
  if (!lex.AtEnd()) lex.Fail("unexpected trailing input");
  return rule;
}

std::string FormatRange(const Rule& rule) {
  const bool integer = rule.kind == RuleKind::kInteger;
  return std::string(integer ? "int(" : "float(") +
         util::FormatDouble(rule.lo) + ", " + util::FormatDouble(rule.hi) + ")";
}

}  // namespace

std::string_view ToString(AlgorithmKind kind) {
  return kind == AlgorithmKind::kClassifier ? "Classifier" : "Preprocessor";
}

std::string HyperparamValueId::ToString() const {
  return algorithm + "::" + hyperparam + "=" + value;
}

HyperparamValueId HyperparamValueId::Parse(std::string_view text) {
  const auto sep = text.find("::");
  const auto eq = text.find('=');
  if (sep == std::string_view::npos || eq == std::string_view::npos ||
      eq < sep + 2 || sep == 0 || eq == sep + 2 || eq + 1 == text.size()) {
    throw InvalidArgument("malformed hyperparameter value id '" +
                          std::string(text) + "', expected alg::hp=value");
  }
  return {std::string(text.substr(0, sep)),
          std::string(text.substr(sep + 2, eq - sep - 2)),
          std::string(text.substr(eq + 1))};
}

Grammar::Grammar(std::vector<Rule> rules) : rules_(std::move(rules)) {
  BuildIndex();
}

void Grammar::BuildIndex() {
  index_.clear();
  algorithms_.clear();
  algorithm_index_.clear();
  value_owner_.clear();
  min_cost_.clear();
  root_ = rules_.empty() ? std::string() : rules_.front().name;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    index_.emplace(rules_[i].name, i);
  }

  // Algorithms: undefined bare symbols inside structural alternatives.
  for (const Rule& rule : rules_) {
    if (rule.kind != RuleKind::kStructural) continue;
    for (const Alternative& alt : rule.alternatives) {
      for (std::size_t s = 0; s < alt.size(); ++s) {
        const std::string& sym = alt[s];
        if (index_.count(sym) || IsBracketed(sym) || IsNamespaced(sym)) {
          continue;
        }
        if (algorithm_index_.count(sym)) continue;  // reported by Validate
        AlgorithmInfo info;
        info.id = sym;
        info.kind = rule.name == kClassifierSymbol
                        ? AlgorithmKind::kClassifier
                        : AlgorithmKind::kPreprocessor;
        info.choice_rule = rule.name;
        // Hyperparameter rules reachable from the other symbols of the
        // alternative, without entering rules that choose algorithms.
        std::set<std::string> seen;
        std::function<void(const std::string&)> collect =
            [&](const std::string& name) {
              if (!seen.insert(name).second) return;
              const Rule* r = Find(name);
              if (r == nullptr) return;
              if (r->IsValueRule()) {
                info.hp_rules.push_back(name);
                return;
              }
              for (const auto& a : r->alternatives)
                for (const auto& child : a) collect(child);
            };
        for (std::size_t o = 0; o < alt.size(); ++o) {
          if (o == s || !index_.count(alt[o])) continue;
          if (info.hp_block.empty()) info.hp_block = alt[o];
          collect(alt[o]);
        }
        algorithm_index_.emplace(sym, algorithms_.size());
        algorithms_.push_back(std::move(info));
      }
    }
  }
  for (const AlgorithmInfo& info : algorithms_) {
    for (const std::string& hp : info.hp_rules) {
      value_owner_.emplace(hp, info.id);
    }
  }

  // Minimum derivation costs by fixpoint iteration.
  bool changed = true;
  for (const Rule& rule : rules_) {
    if (rule.kind == RuleKind::kCategorical) {
      min_cost_[rule.name] = rule.values.empty() ? kUnproductive : 0;
    } else if (rule.IsValueRule()) {
      min_cost_[rule.name] = rule.lo <= rule.hi ? 0 : kUnproductive;
    } else {
      min_cost_[rule.name] = kUnproductive;
    }
  }
  while (changed) {
    changed = false;
    for (const Rule& rule : rules_) {
      if (rule.kind != RuleKind::kStructural) continue;
      int best = kUnproductive;
      for (const Alternative& alt : rule.alternatives) {
        best = std::min(best, 1 + MinDerivations(alt));
      }
      best = std::min(best, kUnproductive);
      if (best < min_cost_[rule.name]) {
        min_cost_[rule.name] = best;
        changed = true;
      }
    }
  }
}

const Rule* Grammar::Find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &rules_[it->second];
}

bool Grammar::IsNonTerminal(std::string_view name) const {
  return index_.count(std::string(name)) > 0;
}

bool Grammar::IsAlgorithm(std::string_view name) const {
  return algorithm_index_.count(std::string(name)) > 0;
}

const AlgorithmInfo* Grammar::FindAlgorithm(std::string_view id) const {
  const auto it = algorithm_index_.find(std::string(id));
  return it == algorithm_index_.end() ? nullptr : &algorithms_[it->second];
}

std::vector<AlgorithmId> Grammar::Classifiers() const {
  std::vector<AlgorithmId> out;
  for (const auto& a : algorithms_)
    if (a.kind == AlgorithmKind::kClassifier) out.push_back(a.id);
  return out;
}

std::vector<AlgorithmId> Grammar::Preprocessors() const {
  std::vector<AlgorithmId> out;
  for (const auto& a : algorithms_)
    if (a.kind == AlgorithmKind::kPreprocessor) out.push_back(a.id);
  return out;
}

std::string Grammar::OwnerOf(std::string_view value_rule) const {
  const auto it = value_owner_.find(std::string(value_rule));
  return it == value_owner_.end() ? std::string() : it->second;
}

const Rule* Grammar::FindHyperparameter(std::string_view algorithm,
                                        std::string_view hyperparam) const {
  const AlgorithmInfo* info = FindAlgorithm(algorithm);
  if (info == nullptr) return nullptr;
  for (const std::string& hp : info->hp_rules) {
    if (HyperparamName(hp) == hyperparam) return Find(hp);
  }
  return nullptr;
}

std::set<TerminalSymbol> Grammar::Terminals() const {
  std::set<TerminalSymbol> out;
  for (const AlgorithmInfo& a : algorithms_) {
    out.insert({a.id, TerminalKind::kAlgorithmName});
  }
  for (const Rule& rule : rules_) {
    if (rule.kind == RuleKind::kCategorical) {
      const std::string owner = OwnerOf(rule.name);
      for (const std::string& v : rule.values) {
        out.insert({HyperparamValueId{owner, HyperparamName(rule.name), v}
                        .ToString(),
                    TerminalKind::kCategoricalValue});
      }
    } else if (rule.IsValueRule()) {
      out.insert({rule.name, TerminalKind::kNumericRange, rule.lo, rule.hi,
                  rule.kind == RuleKind::kInteger});
    }
  }
  return out;
}

std::set<std::string> Grammar::NonTerminals() const {
  std::set<std::string> out;
  for (const Rule& rule : rules_) out.insert(rule.name);
  return out;
}

int Grammar::MinDerivations(std::string_view symbol) const {
  const auto it = min_cost_.find(std::string(symbol));
  if (it != min_cost_.end()) return it->second;
  // Algorithms are free terminals; anything else undefined is unproductive.
  return IsAlgorithm(symbol) ? 0 : kUnproductive;
}

int Grammar::MinDerivations(const Alternative& alternative) const {
  long total = 0;
  for (const std::string& sym : alternative) total += MinDerivations(sym);
  return static_cast<int>(std::min<long>(total, kUnproductive));
}

std::string Grammar::Render() const {
  std::ostringstream out;
  for (const Rule& rule : rules_) {
    out << rule.name << " ::= ";
    switch (rule.kind) {
      case RuleKind::kStructural:
        for (std::size_t a = 0; a < rule.alternatives.size(); ++a) {
          if (a > 0) out << " | ";
          out << util::Join(rule.alternatives[a], " ");
        }
        break;
      case RuleKind::kCategorical:
        out << "cat(" << util::Join(rule.values, ", ") << ")";
        break;
      case RuleKind::kInteger:
      case RuleKind::kReal:
        out << FormatRange(rule);
        break;
    }
    out << "\n";
  }
  return out.str();
}

Grammar ParseGrammar(std::string_view text) {
  std::vector<Rule> rules;
  std::set<std::string> defined;
  for (const LogicalLine& line : SplitProductions(text)) {
    Rule rule = ParseProduction(line);
    if (!defined.insert(rule.name).second) {
      throw GrammarSyntaxError("duplicate definition of '" + rule.name + "'",
                               line.line, 1);
    }
    rules.push_back(std::move(rule));
  }
  if (rules.empty()) throw GrammarSyntaxError("empty grammar", 1, 1);
  for (const Rule& rule : rules) {
    for (const Alternative& alt : rule.alternatives) {
      for (const std::string& sym : alt) {
        if ((IsBracketed(sym) || IsNamespaced(sym)) && !defined.count(sym)) {
          throw UndefinedSymbolError(sym);
        }
      }
    }
  }
  Grammar g(std::move(rules));
  if (auto violations = Validate(g); !violations.empty()) {
    throw GrammarViolationError(
        "invalid grammar: " + util::Join(violations, "; "), violations);
  }
  return g;
}

std::vector<std::string> Validate(const Grammar& g) {
  std::vector<std::string> out;
  if (g.rules().empty()) {
    out.push_back("grammar has no productions");
    return out;
  }
  const Rule& root = g.rules().front();
  if (root.kind != RuleKind::kStructural) {
    out.push_back("root '" + root.name + "' must be a structural production");
  }

  std::map<std::string, int> algorithm_uses;
  for (const Rule& rule : g.rules()) {
    if (rule.kind == RuleKind::kCategorical && rule.values.empty()) {
      const std::string owner = g.OwnerOf(rule.name);
      out.push_back("hyperparameter '" + rule.name + "'" +
                    (owner.empty() ? "" : " of '" + owner + "'") +
                    " has no values");
    }
    if (rule.kind == RuleKind::kCategorical) {
      std::set<std::string> unique(rule.values.begin(), rule.values.end());
      if (unique.size() != rule.values.size()) {
        out.push_back("hyperparameter '" + rule.name +
                      "' has duplicate values");
      }
    }
    if ((rule.kind == RuleKind::kInteger || rule.kind == RuleKind::kReal) &&
        !(rule.lo <= rule.hi)) {
      out.push_back("range of '" + rule.name + "' has lo > hi");
    }
    if (rule.IsValueRule() && g.OwnerOf(rule.name).empty()) {
      out.push_back("hyperparameter '" + rule.name +
                    "' does not belong to any algorithm");
    }
    if (rule.kind != RuleKind::kStructural) continue;
    if (rule.alternatives.empty() && rule.name != kClassifierSymbol) {
      out.push_back("non-terminal '" + rule.name + "' has no alternatives");
    }
    for (const Alternative& alt : rule.alternatives) {
      int algorithms_here = 0;
      for (const std::string& sym : alt) {
        if (g.IsNonTerminal(sym)) continue;
        if (IsBracketed(sym) || IsNamespaced(sym)) {
          out.push_back("undefined symbol '" + sym + "'");
          continue;
        }
        ++algorithm_uses[sym];
        ++algorithms_here;
      }
      if (algorithms_here > 1) {
        out.push_back("alternative of '" + rule.name +
                      "' names more than one algorithm");
      }
    }
  }
  for (const auto& [name, uses] : algorithm_uses) {
    if (uses > 1) out.push_back("algorithm '" + name + "' is not unique");
  }

  const Rule* classifier = g.Find(kClassifierSymbol);
  if (classifier == nullptr || g.Classifiers().empty()) {
    out.push_back("no classifier");
  }

  // Reachability from the root.
  std::set<std::string> reached;
  std::vector<std::string> stack{root.name};
  while (!stack.empty()) {
    const std::string name = stack.back();
    stack.pop_back();
    if (!reached.insert(name).second) continue;
    if (const Rule* r = g.Find(name)) {
      for (const auto& alt : r->alternatives)
        for (const auto& sym : alt)
          if (g.IsNonTerminal(sym)) stack.push_back(sym);
    }
  }
  for (const Rule& rule : g.rules()) {
    if (!reached.count(rule.name)) {
      out.push_back("non-terminal '" + rule.name + "' is unreachable");
    }
    if (g.MinDerivations(rule.name) >= Grammar::kUnproductive &&
        !(rule.kind == RuleKind::kCategorical && rule.values.empty())) {
      out.push_back("non-terminal '" + rule.name + "' is unproductive");
    }
  }
  return out;
}

namespace {

// Drops alternatives that reference unproductive symbols, then rules that are
// unreachable from the root. Repeats until stable.
std::vector<Rule> Prune(std::vector<Rule> rules) {
  while (true) {
    const Grammar g(rules);
    bool changed = false;
    for (Rule& rule : rules) {
      if (rule.kind != RuleKind::kStructural) continue;
      const auto before = rule.alternatives.size();
      std::erase_if(rule.alternatives, [&](const Alternative& alt) {
        return g.MinDerivations(alt) >= Grammar::kUnproductive;
      });
      changed |= rule.alternatives.size() != before;
    }
    std::set<std::string> reached;
    std::vector<std::string> stack;
    if (!rules.empty()) stack.push_back(rules.front().name);
    const Grammar updated(rules);
    while (!stack.empty()) {
      const std::string name = stack.back();
      stack.pop_back();
      if (!reached.insert(name).second) continue;
      if (const Rule* r = updated.Find(name)) {
        for (const auto& alt : r->alternatives)
          for (const auto& sym : alt)
            if (updated.IsNonTerminal(sym)) stack.push_back(sym);
      }
    }
    const auto before = rules.size();
    std::erase_if(rules, [&](const Rule& r) { return !reached.count(r.name); });
    changed |= rules.size() != before;
    if (!changed) return rules;
  }
}

}  // namespace

Grammar RemoveAlgorithm(const Grammar& g, const AlgorithmId& a) {
  const AlgorithmInfo* info = g.FindAlgorithm(a);
  if (info == nullptr) {
    throw GrammarViolationError("unknown algorithm '" + a + "'",
                                {"unknown algorithm '" + a + "'"});
  }
  if (info->kind == AlgorithmKind::kClassifier && g.Classifiers().size() == 1) {
    const std::string msg = "cannot remove '" + a + "': last classifier";
    throw GrammarViolationError(msg, {"no classifier"});
  }
  std::vector<Rule> rules = g.rules();
  for (Rule& rule : rules) {
    if (rule.name != info->choice_rule) continue;
    std::erase_if(rule.alternatives, [&](const Alternative& alt) {
      return std::find(alt.begin(), alt.end(), a) != alt.end();
    });
  }
  Grammar out(Prune(std::move(rules)));
  if (auto violations = Validate(out); !violations.empty()) {
    throw GrammarViolationError("removing '" + a + "' invalidates the grammar",
                                violations);
  }
  return out;
}

Grammar RemoveHyperparameterValue(const Grammar& g,
                                  const HyperparamValueId& v) {
  const Rule* rule = g.FindHyperparameter(v.algorithm, v.hyperparam);
  const bool known = rule != nullptr && rule->kind == RuleKind::kCategorical &&
                     std::find(rule->values.begin(), rule->values.end(),
                               v.value) != rule->values.end();
  if (!known) {
    const std::string msg = "unknown hyperparameter value '" + v.ToString() + "'";
    throw GrammarViolationError(msg, {msg});
  }
  if (rule->values.size() == 1) {
    const std::string msg = "hyperparameter '" + rule->name +
                            "' has no values";
    throw GrammarViolationError(
        "cannot remove '" + v.ToString() + "': last value", {msg});
  }
  std::vector<Rule> rules = g.rules();
  for (Rule& r : rules) {
    if (r.name == rule->name) std::erase(r.values, v.value);
  }
  return Grammar(std::move(rules));
}

RemovableSymbols GetRemovableSymbols(const Grammar& g) {
  RemovableSymbols out;
  const bool single_classifier = g.Classifiers().size() <= 1;
  for (const AlgorithmInfo& a : g.algorithms()) {
    if (a.kind == AlgorithmKind::kClassifier && single_classifier) continue;
    out.algorithms.insert(a.id);
  }
  for (const AlgorithmInfo& a : g.algorithms()) {
    for (const std::string& hp : a.hp_rules) {
      const Rule* rule = g.Find(hp);
      if (rule == nullptr || rule->kind != RuleKind::kCategorical ||
          rule->values.size() < 2) {
        continue;
      }
      for (const std::string& value : rule->values) {
        out.values.insert({a.id, HyperparamName(hp), value});
      }
    }
  }
  return out;
}

const Grammar& DefaultGrammar() {
  static const Grammar grammar = ParseGrammar(DefaultGrammarText());
  return grammar;
}

}  // namespace evoflow::grammar
