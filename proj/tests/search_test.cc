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

#include <gtest/gtest.h>

#include <set>

#include "evoflow/errors.h"
#include "evoflow/grammar.h"

namespace evoflow::search {
namespace {

using Kind = DerivationNode::Kind;

DerivationNode Structural(std::string symbol, std::vector<DerivationNode> children) {
  DerivationNode n;
  n.kind = Kind::kStructural;
  n.symbol = std::move(symbol);
  n.children = std::move(children);
  return n;
}

DerivationNode Algorithm(std::string id) {
  DerivationNode n;
  n.kind = Kind::kAlgorithm;
  n.symbol = std::move(id);
  return n;
}

DerivationNode Category(std::string rule, std::string value) {
  DerivationNode n;
  n.kind = Kind::kCategorical;
  n.symbol = std::move(rule);
  n.category = std::move(value);
  return n;
}

DerivationNode Integer(std::string rule, double value) {
  DerivationNode n;
  n.kind = Kind::kNumeric;
  n.symbol = std::move(rule);
  n.number = value;
  n.integer = true;
  return n;
}

Individual Evaluated(double fitness, double time, std::string classifier = "kNN") {
  Individual ind;
  ind.workflow = MakeWorkflow({{classifier, {}}});
  ind.evaluation = evaluation::EvaluationRecord{fitness, time, false, classifier, ""};
  return ind;
}

const Grammar& ScalerKnnGrammar() {
  static const Grammar g = grammar::ParseGrammar(R"(
workflow ::= pipeline
pipeline ::= preproc pipeline | classifier
preproc ::= standardScaler
classifier ::= kNN <kNN_hp>
<kNN_hp> ::= kNN::n_neighbors kNN::weights
kNN::n_neighbors ::= int(1, 30)
kNN::weights ::= cat(uniform, distance)
)");
  return g;
}

DerivationTree ScalerKnnTree() {
  return {Structural(
      "workflow",
      {Structural("pipeline",
                  {Structural("preproc", {Algorithm("standardScaler")}),
                   Structural("pipeline",
                              {Structural("classifier",
                                          {Algorithm("kNN"),
                                           Structural("<kNN_hp>",
                                                      {Integer("kNN::n_neighbors", 3),
                                                       Category("kNN::weights", "uniform")})})})})})};
}

TEST(DecodeTest, ScalerThenKnn) {
  const DerivationTree tree = ScalerKnnTree();
  EXPECT_TRUE(IsValid(tree, ScalerKnnGrammar(), kDefaultMaxDerivations));
  const WorkflowSpec w = Decode(tree);
  ASSERT_EQ(w.steps.size(), 2u);
  EXPECT_EQ(w.canonical_key, "standardScaler()|kNN(n_neighbors=3,weights=uniform)");
  EXPECT_EQ(w.classifier(), "kNN");
  EXPECT_EQ(w.steps[1].GetInt("n_neighbors", 0), 3);
  EXPECT_EQ(w.steps[1].GetString("weights", ""), "uniform");
}

TEST(DecodeTest, BareClassifier) {
  Rng rng(1);
  const Grammar g = grammar::ParseGrammar(R"(
workflow ::= classifier
classifier ::= gaussianNB <gaussianNB_hp>
<gaussianNB_hp> ::= gaussianNB::priors
gaussianNB::priors ::= cat(empirical, uniform)
)");
  for (int i = 0; i < 20; ++i) EXPECT_EQ(RandomIndividual(g, 13, rng).workflow.steps.size(), 1u);
}

TEST(DecodeTest, KeyDependsOnLeavesOnly) {
  DerivationTree a = ScalerKnnTree();
  // Same leaves under a flatter structure.
  DerivationTree b{Structural(
      "workflow", {Algorithm("standardScaler"), Algorithm("kNN"),
                   Integer("kNN::n_neighbors", 3), Category("kNN::weights", "uniform")})};
  EXPECT_NE(a, b);
  EXPECT_EQ(Decode(a).canonical_key, Decode(b).canonical_key);
}

TEST(CanonicalKeyTest, SortsKeysAndFormatsReals) {
  WorkflowStep step{"logisticRegression", {{"penalty", std::string("l2")}, {"C", 0.5}}};
  EXPECT_EQ(CanonicalKey({step}), "logisticRegression(C=0.5,penalty=l2)");
}

TEST(RandomTreeTest, DefaultGrammarShapes) {
  Rng rng(2024);
  const Grammar& g = grammar::DefaultGrammar();
  std::set<std::size_t> lengths;
  for (int i = 0; i < 10000; ++i) {
    const Individual ind = RandomIndividual(g, kDefaultMaxDerivations, rng);
    const auto& steps = ind.workflow.steps;
    ASSERT_GE(steps.size(), 1u);
    ASSERT_LE(steps.size(), 5u);
    lengths.insert(steps.size());
    const auto* last = g.FindAlgorithm(steps.back().algorithm);
    ASSERT_NE(last, nullptr);
    ASSERT_EQ(last->kind, grammar::AlgorithmKind::kClassifier);
    for (std::size_t s = 0; s + 1 < steps.size(); ++s) {
      ASSERT_EQ(g.FindAlgorithm(steps[s].algorithm)->kind, grammar::AlgorithmKind::kPreprocessor);
    }
    ASSERT_TRUE(IsValid(ind.tree, g, kDefaultMaxDerivations));
  }
  EXPECT_EQ(lengths, (std::set<std::size_t>{1, 2, 3, 4, 5}));
}

TEST(RandomTreeTest, SeededDeterminism) {
  Rng a(77), b(77);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(RandomTree(grammar::DefaultGrammar(), 13, a), RandomTree(grammar::DefaultGrammar(), 13, b));
  }
}

TEST(RandomTreeTest, BudgetTooSmall) {
  Rng rng(1);
  EXPECT_THROW(RandomTree(grammar::DefaultGrammar(), 3, rng), InvalidArgument);
}

TEST(SelectionTest, SingleIndividual) {
  Rng rng(3);
  const std::vector<Individual> pop = {Evaluated(0.4, 1.0)};
  EXPECT_EQ(TournamentSelect(pop, rng), 0u);
}

TEST(SelectionTest, FitnessDominates) {
  const Individual a = Evaluated(0.9, 5.0), b = Evaluated(0.7, 1.0);
  EXPECT_TRUE(IsBetter(a, 1, b, 0));
  EXPECT_FALSE(IsBetter(b, 0, a, 1));
}

TEST(SelectionTest, TimeBreaksFitnessTies) {
  const Individual slow = Evaluated(0.8, 2.0), fast = Evaluated(0.8, 1.0);
  EXPECT_TRUE(IsBetter(fast, 1, slow, 0));
  const std::vector<Individual> pop = {slow, fast};
  EXPECT_EQ(BestIndex(pop), 1u);
  EXPECT_EQ(WorstIndex(pop), 0u);
}

TEST(SelectionTest, IndexBreaksFullTies) {
  const std::vector<Individual> pop = {Evaluated(0.8, 1.0), Evaluated(0.8, 1.0)};
  EXPECT_EQ(BestIndex(pop), 0u);
  EXPECT_EQ(WorstIndex(pop), 1u);
}

TEST(CrossoverTest, IdenticalParents) {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const Individual p = RandomIndividual(grammar::DefaultGrammar(), 13, rng);
    const auto [c1, c2] = Crossover(p, p, grammar::DefaultGrammar(), 13, rng);
    EXPECT_EQ(c1.workflow, p.workflow);
    EXPECT_EQ(c2.workflow, p.workflow);
  }
}

TEST(CrossoverTest, OnlyRootSharedSwapsWholeTrees) {
  const Grammar& g = grammar::DefaultGrammar();
  Individual a, b;
  a.tree = {Structural("workflow", {Structural("left", {Algorithm("kNN")})})};
  b.tree = {Structural("workflow", {Structural("right", {Algorithm("lda")})})};
  a.workflow = Decode(a.tree);
  b.workflow = Decode(b.tree);
  Rng rng(4);
  const auto [c1, c2] = Crossover(a, b, g, 13, rng);
  EXPECT_EQ(c1.workflow, b.workflow);
  EXPECT_EQ(c2.workflow, a.workflow);
}

TEST(CrossoverTest, OffspringValidUnderCap) {
  Rng rng(11);
  const Grammar& g = grammar::DefaultGrammar();
  for (int i = 0; i < 1000; ++i) {
    const Individual a = RandomIndividual(g, 13, rng), b = RandomIndividual(g, 13, rng);
    const auto [c1, c2] = Crossover(a, b, g, 13, rng);
    ASSERT_TRUE(IsValid(c1.tree, g, 13));
    ASSERT_TRUE(IsValid(c2.tree, g, 13));
    ASSERT_LE(c1.tree.DerivationCount(), 13);
    ASSERT_LE(c2.tree.DerivationCount(), 13);
    ASSERT_FALSE(c1.evaluation.has_value());
    // Leaves are conserved across the pair.
    ASSERT_EQ(c1.workflow.steps.size() + c2.workflow.steps.size(),
              a.workflow.steps.size() + b.workflow.steps.size());
  }
}

TEST(MutationTest, NoVariabilityGrammar) {
  const Grammar g = grammar::ParseGrammar(R"(
workflow ::= classifier
classifier ::= kNN <kNN_hp>
<kNN_hp> ::= kNN::weights
kNN::weights ::= cat(uniform)
)");
  Rng rng(5);
  const Individual ind = RandomIndividual(g, 13, rng);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(Mutate(ind, g, 13, rng).workflow, ind.workflow);
}

TEST(MutationTest, ValidUnderCap) {
  Rng rng(12);
  const Grammar& g = grammar::DefaultGrammar();
  for (int i = 0; i < 1000; ++i) {
    const Individual m = Mutate(RandomIndividual(g, 13, rng), g, 13, rng);
    ASSERT_TRUE(IsValid(m.tree, g, 13));
    ASSERT_FALSE(m.evaluation.has_value());
  }
}

TEST(MutationTest, PrunedAlgorithmNeverReintroduced) {
  Rng rng(13);
  const Grammar g = grammar::RemoveAlgorithm(grammar::DefaultGrammar(), "decisionTree");
  for (int i = 0; i < 1000; ++i) {
    const Individual m = Mutate(RandomIndividual(g, 13, rng), g, 13, rng);
    ASSERT_FALSE(m.workflow.Contains("decisionTree"));
  }
}

TEST(ReplaceTest, OffspringAlreadyBetter) {
  const std::vector<Individual> pop = {Evaluated(0.9, 1), Evaluated(0.5, 1)};
  const std::vector<Individual> off = {Evaluated(0.95, 1), Evaluated(0.1, 1)};
  const auto out = Replace(pop, off);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].fitness(), 0.95);
  EXPECT_EQ(out[1].fitness(), 0.1);
}

TEST(ReplaceTest, EliteReplacesWorstChild) {
  const std::vector<Individual> pop = {Evaluated(0.5, 1), Evaluated(0.95, 1, "lda")};
  const std::vector<Individual> off = {Evaluated(0.2, 1), Evaluated(0.9, 1)};
  const auto out = Replace(pop, off);
  EXPECT_EQ(out[0].fitness(), 0.95);
  EXPECT_EQ(out[0].workflow.classifier(), "lda");
  EXPECT_EQ(out[1].fitness(), 0.9);
}

TEST(ReplaceTest, IdenticalPopulations) {
  const std::vector<Individual> pop = {Evaluated(0.5, 1), Evaluated(0.5, 1)};
  const auto out = Replace(pop, pop);
  for (std::size_t i = 0; i < pop.size(); ++i) EXPECT_EQ(out[i].evaluation, pop[i].evaluation);
}

TEST(ReplaceTest, SizeMismatch) {
  const std::vector<Individual> pop = {Evaluated(0.5, 1)};
  EXPECT_THROW(Replace(pop, {}), InvalidArgument);
}

}  // namespace
}  // namespace evoflow::search
