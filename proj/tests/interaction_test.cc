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

#include <gtest/gtest.h>

#include "evoflow/errors.h"
#include "oracles.h"
#include "test_support.h"

namespace evoflow::interaction {
namespace {

SnapshotIndividual Ind(std::vector<search::WorkflowStep> steps, double fitness, double time) {
  SnapshotIndividual ind;
  ind.workflow = search::MakeWorkflow(std::move(steps));
  ind.record = {fitness, time, false, ind.workflow.classifier(), ""};
  return ind;
}

search::WorkflowStep Step(std::string algorithm) { return {std::move(algorithm), {}}; }

Thresholds Both(double acc, double time) { return {acc, time}; }

TEST(PartitionTest, BothDisabledMeansEveryoneIsBest) {
  InteractionSnapshot s;
  s.individuals = {Ind({Step("kNN")}, 0.1, 9.0), Ind({Step("lda")}, 0.9, 0.1)};
  const auto p = Partition(s, {});
  EXPECT_EQ(p.r_best, (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(p.r_worst.empty());
  EXPECT_TRUE(RemovalCandidates(s, p, grammar::DefaultGrammar()).Empty());
}

TEST(PartitionTest, StrictAccuracyThreshold) {
  InteractionSnapshot s;
  s.individuals = {Ind({Step("kNN")}, 1.0, 1.0), Ind({Step("lda")}, 0.5, 0.1)};
  const auto p = Partition(s, {1.0, std::nullopt});
  EXPECT_TRUE(p.r_best.empty());
  EXPECT_EQ(p.r_worst.size(), 2u);
}

TEST(PartitionTest, BothAxes) {
  InteractionSnapshot s;
  s.individuals = {Ind({Step("kNN")}, 0.9, 1.0), Ind({Step("lda")}, 0.7, 1.0),
                   Ind({Step("gaussianNB")}, 0.9, 5.0)};
  const auto p = Partition(s, Both(0.8, 2.0));
  EXPECT_EQ(p.r_best, std::vector<std::size_t>{0});
  EXPECT_EQ(p.r_worst, (std::vector<std::size_t>{1, 2}));
}

TEST(PartitionTest, RaisingThresholdOnlyShrinksBestRegion) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = testing::RandomSnapshot(rng);
    Thresholds loose = c.thresholds;
    Thresholds strict = loose;
    if (strict.t_acc) strict.t_acc = std::min(1.0, *strict.t_acc + 0.1);
    if (strict.t_time) strict.t_time = *strict.t_time * 0.5;
    const auto a = Partition(c.snapshot, loose), b = Partition(c.snapshot, strict);
    ASSERT_TRUE(std::includes(a.r_best.begin(), a.r_best.end(), b.r_best.begin(), b.r_best.end()));
    ASSERT_EQ(b.r_best.size() + b.r_worst.size(), c.snapshot.individuals.size());
  }
}

TEST(RemovalCandidatesTest, EmptyWorstRegion) {
  InteractionSnapshot s;
  s.individuals = {Ind({Step("kNN")}, 0.9, 1.0)};
  EXPECT_TRUE(RemovalCandidates(s, Partition(s, Both(0.5, 2.0)), grammar::DefaultGrammar()).Empty());
}

TEST(RemovalCandidatesTest, AlgorithmInBothRegionsExcluded) {
  InteractionSnapshot s;
  s.individuals = {Ind({Step("standardScaler"), Step("kNN")}, 0.9, 1.0),
                   Ind({Step("standardScaler"), Step("lda")}, 0.2, 1.0)};
  const auto c = RemovalCandidates(s, Partition(s, {0.5, std::nullopt}), grammar::DefaultGrammar());
  EXPECT_EQ(c.algorithms, std::set<grammar::AlgorithmId>{"lda"});
}

TEST(RemovalCandidatesTest, IncludesCategoricalValues) {
  InteractionSnapshot s;
  s.individuals = {Ind({{"kNN", {{"weights", std::string("uniform")}}}}, 0.9, 1.0),
                   Ind({{"kNN", {{"weights", std::string("distance")}}}}, 0.2, 1.0)};
  const auto c = RemovalCandidates(s, Partition(s, {0.5, std::nullopt}), grammar::DefaultGrammar());
  EXPECT_TRUE(c.algorithms.empty());
  EXPECT_EQ(c.hyperparameter_values,
            std::set<grammar::HyperparamValueId>{grammar::HyperparamValueId::Parse("kNN::weights=distance")});
}

TEST(RemovalCandidatesTest, OnlyRemovableSymbols) {
  const grammar::Grammar g = grammar::ParseGrammar(R"(
workflow ::= classifier
classifier ::= kNN <kNN_hp>
<kNN_hp> ::= kNN::weights
kNN::weights ::= cat(uniform, distance)
)");
  InteractionSnapshot s;
  s.individuals = {Ind({{"kNN", {{"weights", std::string("distance")}}}}, 0.2, 1.0)};
  const auto c = RemovalCandidates(s, Partition(s, {0.5, std::nullopt}), g);
  EXPECT_TRUE(c.algorithms.empty());
  EXPECT_EQ(c.hyperparameter_values.size(), 1u);
}

TEST(RemovalCandidatesTest, MatchesSetComprehensionOracle) {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = testing::RandomSnapshot(rng);
    const auto got = WithThresholds(c.snapshot, c.thresholds, c.grammar);
    ASSERT_EQ(*got.candidates, testing::CandidateOracle(c)) << "trial " << trial;
  }
}

TEST(ComputeStatsTest, SingleOccurrence) {
  const auto stats = ComputeStats({Ind({Step("pca"), Step("kNN")}, 0.8, 2.0),
                                   Ind({Step("lda")}, 0.6, 1.0), Ind({Step("lda")}, 0.7, 3.0)});
  ASSERT_EQ(stats.size(), 3u);
  // Sorted by (kind, symbol): preprocessors, then classifiers.
  EXPECT_EQ(stats[0].symbol, "pca");
  EXPECT_EQ(stats[0].kind, SymbolKind::kPreprocessor);
  EXPECT_EQ(stats[1].symbol, "kNN");
  EXPECT_EQ(stats[1].occurrences, 1);
  EXPECT_EQ(stats[1].max_eval_time, stats[1].mean_eval_time);
  EXPECT_EQ(stats[2].symbol, "lda");
  EXPECT_EQ(stats[2].occurrences, 2);
  EXPECT_DOUBLE_EQ(stats[2].mean_eval_time, 2.0);
  EXPECT_EQ(stats[2].max_eval_time, 3.0);
  EXPECT_EQ(stats[2].max_fitness, 0.7);
}

TEST(SymbolKindTest, RoundTrip) {
  for (auto k : {SymbolKind::kPreprocessor, SymbolKind::kClassifier, SymbolKind::kHyperparamValue}) {
    EXPECT_EQ(ParseSymbolKind(ToString(k)), k);
  }
  EXPECT_THROW(ParseSymbolKind("Other"), InvalidArgument);
}

TEST(ThresholdsTest, Check) {
  EXPECT_NO_THROW(Thresholds{}.Check());
  EXPECT_THROW((Thresholds{1.5, std::nullopt}.Check()), InvalidArgument);
  EXPECT_THROW((Thresholds{std::nullopt, -1.0}.Check()), InvalidArgument);
}

class SnapshotFromSessionTest : public ::testing::Test {
 protected:
  static engine::Session Paused() {
    engine::EngineConfig c;
    c.population_size = 10;
    c.max_generations = 6;
    c.first_interaction_generation = 3;
    c.max_interactions = 10;
    c.cv_folds = 3;
    c.seed = 4;
    auto data = std::make_shared<const ml::Dataset>(testing::Blobs(20, 3, 3, 2.0, 1));
    auto s = engine::Session::Start(c, grammar::DefaultGrammar(), data,
                                    std::make_shared<evaluation::StepClock>(0.01));
    s.RunUntilPause();
    return s;
  }
};

TEST_F(SnapshotFromSessionTest, HoldsEveryFreshEvaluation) {
  const auto s = Paused();
  const auto snap = BuildSnapshot(s);
  std::size_t fresh = 0;
  for (const auto& e : s.eval_log()) fresh += e.cached ? 0 : 1;
  EXPECT_EQ(snap.individuals.size(), fresh);
  EXPECT_LE(snap.individuals.size(), 10u * 4u);
  EXPECT_EQ(snap.generation, 3);
  EXPECT_GE(snap.best_global.record.fitness, snap.best_current.record.fitness);
  EXPECT_EQ(snap.budget.interactions_left, 10);
  EXPECT_EQ(snap.budget.generations_left, 3);
  ASSERT_EQ(snap.time_divergence.size(), 4u);
  EXPECT_FALSE(snap.time_divergence[0].baseline_cumulative_eval_time.has_value());
  EXPECT_FALSE(snap.thresholds.has_value());
  EXPECT_FALSE(snap.candidates.has_value());
}

TEST_F(SnapshotFromSessionTest, BudgetAfterTwoInteractions) {
  auto s = Paused();
  engine::Feedback f;
  f.decision = engine::Decision::Continue(1);
  s.ApplyFeedback(f);
  s.RunUntilPause();
  s.ApplyFeedback(f);
  s.RunUntilPause();
  const auto snap = BuildSnapshot(s);
  EXPECT_EQ(snap.budget.interactions_left, 8);
  // Only evaluations since the previous pause.
  EXPECT_LE(snap.individuals.size(), 10u);
}

TEST_F(SnapshotFromSessionTest, BaselineSeries) {
  const auto s = Paused();
  const std::vector<double> baseline = {1.0, 2.0};
  const auto snap = BuildSnapshot(s, &baseline);
  EXPECT_EQ(snap.time_divergence[1].baseline_cumulative_eval_time, 2.0);
  EXPECT_FALSE(snap.time_divergence[2].baseline_cumulative_eval_time.has_value());
}

TEST_F(SnapshotFromSessionTest, RunningSessionRejected) {
  auto s = Paused();
  engine::Feedback f;
  f.decision = engine::Decision::Continue(1);
  s.ApplyFeedback(f);
  EXPECT_THROW(BuildSnapshot(s), StateError);
}

}  // namespace
}  // namespace evoflow::interaction
