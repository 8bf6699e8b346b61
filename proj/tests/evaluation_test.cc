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

#include "evoflow/evaluation.h"

#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <set>
#include <thread>

#include "evoflow/errors.h"
#include "test_support.h"

namespace evoflow::evaluation {
namespace {

using testing::Blobs;

// Mean over present classes of confusion[c][c] / row_total[c].
double ConfusionOracle(const std::vector<int>& t, const std::vector<int>& p, int k) {
  std::vector<std::vector<long>> cm(k, std::vector<long>(k, 0));
  for (std::size_t i = 0; i < t.size(); ++i) ++cm[t[i]][p[i]];
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < k; ++c) {
    long row = 0;
    for (int j = 0; j < k; ++j) row += cm[c][j];
    if (row == 0) continue;
    ++present;
    sum += static_cast<double>(cm[c][c]) / static_cast<double>(row);
  }
  return sum / present;
}

TEST(BalancedAccuracyTest, PerfectPrediction) {
  const std::vector<int> y = {0, 1, 2, 1, 0};
  EXPECT_EQ(BalancedAccuracy(y, y), 1.0);
}

TEST(BalancedAccuracyTest, ConstantPredictorOnBalancedClasses) {
  EXPECT_EQ(BalancedAccuracy(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 0, 0, 0}), 0.5);
}

TEST(BalancedAccuracyTest, HandConfusionMatrix) {
  // A=0, B=1: recall(A) = 2/3, recall(B) = 1.
  EXPECT_DOUBLE_EQ(BalancedAccuracy(std::vector<int>{0, 0, 0, 1}, std::vector<int>{0, 0, 1, 1}),
                   (2.0 / 3.0 + 1.0) / 2.0);
}

TEST(BalancedAccuracyTest, RejectsBadInput) {
  EXPECT_THROW(BalancedAccuracy(std::vector<int>{}, std::vector<int>{}), InvalidArgument);
  EXPECT_THROW(BalancedAccuracy(std::vector<int>{0}, std::vector<int>{0, 1}), InvalidArgument);
}

TEST(BalancedAccuracyTest, MatchesConfusionOracleOnRandomPairs) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 6);
    const std::size_t n = 1 + rng() % 200;
    std::vector<int> t(n), p(n);
    for (auto& v : t) v = static_cast<int>(rng() % k);
    for (auto& v : p) v = static_cast<int>(rng() % k);
    ASSERT_NEAR(BalancedAccuracy(t, p), ConfusionOracle(t, p, k), 1e-12);
  }
}

TEST(FoldPlanTest, ExactStratification) {
  ml::Labels y(20);
  for (int i = 0; i < 20; ++i) y[i] = i % 2;
  const FoldPlan plan = MakeFoldPlan(y, 5, 1);
  for (int f = 0; f < 5; ++f) {
    const auto held = plan.HeldOut(f);
    ASSERT_EQ(held.size(), 4u);
    int ones = 0;
    for (auto i : held) ones += y[i];
    EXPECT_EQ(ones, 2);
  }
}

TEST(FoldPlanTest, Deterministic) {
  ml::Labels y = {0, 1, 1, 0, 2, 2, 2, 1, 0, 0, 1};
  EXPECT_EQ(MakeFoldPlan(y, 3, 8), MakeFoldPlan(y, 3, 8));
}

TEST(FoldPlanTest, SmallClassSpreadsOverDistinctFolds) {
  ml::Labels y(23, 0);
  y[4] = y[11] = y[19] = 1;
  const FoldPlan plan = MakeFoldPlan(y, 5, 3);
  std::set<int> folds;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] == 1) folds.insert(plan.fold[i]);
  EXPECT_EQ(folds.size(), 3u);
}

TEST(FoldPlanTest, TrainingIsComplementOfHeldOut) {
  ml::Labels y = {0, 1, 0, 1, 0, 1, 1, 0};
  const FoldPlan plan = MakeFoldPlan(y, 3, 2);
  for (int f = 0; f < 3; ++f) {
    auto all = plan.Training(f);
    const auto held = plan.HeldOut(f);
    all.insert(all.end(), held.begin(), held.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  }
  EXPECT_THROW(MakeFoldPlan(y, 1, 0), InvalidArgument);
}

TEST(FoldPlanTest, PerClassSkewAtMostOneOnRandomLabels) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int classes = 2 + static_cast<int>(rng() % 5);
    const int k = 2 + static_cast<int>(rng() % 9);
    const std::size_t n = 2 + rng() % 300;
    ml::Labels y(n);
    for (auto& v : y) v = static_cast<int>(rng() % classes);
    const FoldPlan plan = MakeFoldPlan(y, k, rng());
    ASSERT_EQ(plan.fold.size(), n);
    std::vector<std::vector<int>> counts(classes, std::vector<int>(k, 0));
    std::vector<int> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_GE(plan.fold[i], 0);
      ASSERT_LT(plan.fold[i], k);
      ++counts[y[i]][plan.fold[i]];
      ++sizes[plan.fold[i]];
    }
    for (const auto& c : counts) {
      ASSERT_LE(*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end()), 1);
    }
    ASSERT_LE(*std::max_element(sizes.begin(), sizes.end()) -
                  *std::min_element(sizes.begin(), sizes.end()),
              1);
  }
}

TEST(ClockTest, ScriptedAndStep) {
  ScriptedClock scripted({1.0, 2.5});
  EXPECT_EQ(scripted.Now(), 1.0);
  EXPECT_EQ(scripted.Now(), 2.5);
  EXPECT_EQ(scripted.Now(), 2.5);
  StepClock step(0.25);
  EXPECT_EQ(step.Now(), 0.0);
  EXPECT_EQ(step.Now(), 0.25);
  EXPECT_EQ(step.Now(), 0.5);
}

search::WorkflowSpec Nb() {
  return search::MakeWorkflow({{"gaussianNB", {{"priors", std::string("empirical")}}}});
}

TEST(EvaluateTest, CacheHitReturnsSameRecordWithoutRecomputing) {
  const ml::Dataset d = Blobs(20, 2, 2, 1.0, 1);
  const FoldPlan plan = MakeFoldPlan(d.labels, 5, 1);
  EvaluationCache cache;
  StepClock clock(1.0);
  const Evaluation first = Evaluate(Nb(), d, plan, cache, clock, 0);
  const Evaluation second = Evaluate(Nb(), d, plan, cache, clock, 0);
  EXPECT_FALSE(first.cached);
  EXPECT_TRUE(second.cached);
  EXPECT_EQ(first.record, second.record);
  EXPECT_EQ(first.record.eval_time, 1.0);
  EXPECT_EQ(cache.misses(), 1u);
  EXPECT_EQ(cache.hits(), 1u);
  EXPECT_EQ(cache.size(), 1u);
}

TEST(EvaluateTest, SingularLdaScoresZero) {
  ml::Dataset d;
  d.class_names = {"a", "b"};
  d.features = ml::Matrix::Zero(20, 2);
  for (int i = 0; i < 20; ++i) {
    d.labels.push_back(i % 2);
    d.features(i, 0) = d.features(i, 1) = i % 2;
  }
  const FoldPlan plan = MakeFoldPlan(d.labels, 5, 1);
  StepClock clock(0.5);
  const auto r = EvaluateUncached(search::MakeWorkflow({{"lda", {{"shrinkage", 0.0}}}}), d, plan,
                                  clock, 0);
  EXPECT_TRUE(r.failed);
  EXPECT_EQ(r.fitness, 0.0);
  EXPECT_EQ(r.classifier, "lda");
  EXPECT_FALSE(r.failure.empty());
}

TEST(EvaluateTest, NaiveBayesOnSeparableBlobsMatchesManualFolds) {
  const ml::Dataset d = Blobs(50, 2, 2, 0.8, 12);
  const FoldPlan plan = MakeFoldPlan(d.labels, 5, 4);
  StepClock clock(1.0);
  const auto r = EvaluateUncached(Nb(), d, plan, clock, 0);
  EXPECT_GE(r.fitness, 0.95);

  std::vector<int> pooled(d.rows());
  search::Rng rng(0);
  for (int f = 0; f < 5; ++f) {
    const auto held = plan.HeldOut(f);
    const auto fitted = ml::FitPipeline(Nb(), d.Subset(plan.Training(f)), rng);
    const auto p = ml::PredictPipeline(fitted, d.Subset(held).features);
    for (std::size_t i = 0; i < held.size(); ++i) pooled[held[i]] = p[i];
  }
  EXPECT_EQ(r.fitness, BalancedAccuracy(d.labels, pooled));
}

TEST(EvaluationCacheTest, ConcurrentMissesComputeOnce) {
  EvaluationCache cache;
  std::atomic<int> computes{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int k = 0; k < 50; ++k) {
        cache.GetOrCompute("key" + std::to_string(k), [&] {
          ++computes;
          std::this_thread::yield();
          return EvaluationRecord{0.5, 1.0, false, "kNN", ""};
        });
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(computes.load(), 50);
  EXPECT_EQ(cache.misses(), 50u);
  EXPECT_EQ(cache.hits(), 8u * 50u - 50u);
}

TEST(EvaluationCacheTest, CopyKeepsEntriesAndCounters) {
  EvaluationCache cache;
  cache.GetOrCompute("a", [] { return EvaluationRecord{0.7, 2.0, false, "lda", ""}; });
  EvaluationCache copy(cache);
  EXPECT_EQ(copy.size(), 1u);
  EXPECT_EQ(copy.misses(), 1u);
  ASSERT_TRUE(copy.Peek("a").has_value());
  EXPECT_EQ(copy.Peek("a")->fitness, 0.7);
  EXPECT_FALSE(copy.Peek("b").has_value());
}

TEST(EvaluationCacheTest, FailedComputationPropagates) {
  EvaluationCache cache;
  EXPECT_THROW(cache.GetOrCompute("x", []() -> EvaluationRecord { throw InvalidArgument("boom"); }),
               InvalidArgument);
}

}  // namespace
}  // namespace evoflow::evaluation
