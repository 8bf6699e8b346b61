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

#include "evoflow/ml.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "evoflow/errors.h"
#include "evoflow/grammar.h"
#include "test_support.h"

namespace evoflow::ml {
namespace {

using testing::Blobs;

WorkflowSpec Workflow(std::vector<WorkflowStep> steps) { return search::MakeWorkflow(std::move(steps)); }

WorkflowStep Knn(std::int64_t k) {
  return {"kNN", {{"n_neighbors", k}, {"weights", std::string("uniform")},
                  {"metric", std::string("euclidean")}}};
}

TEST(CatalogTest, TwentyAlgorithms) {
  const auto& catalog = Catalog();
  ASSERT_EQ(catalog.size(), 20u);
  int pre = 0, cls = 0;
  for (const auto& d : catalog) (d.kind == AlgorithmKind::kPreprocessor ? pre : cls)++;
  EXPECT_EQ(pre, 10);
  EXPECT_EQ(cls, 10);
  EXPECT_EQ(FindDescriptor("fastICA")->kind, AlgorithmKind::kPreprocessor);
  EXPECT_EQ(FindDescriptor("kNN")->kind, AlgorithmKind::kClassifier);
  EXPECT_EQ(FindDescriptor("randomForest"), nullptr);
}

TEST(CatalogTest, MatchesDefaultGrammar) {
  const auto& g = grammar::DefaultGrammar();
  ASSERT_EQ(g.algorithms().size(), Catalog().size());
  for (const auto& info : g.algorithms()) {
    const auto* d = FindDescriptor(info.id);
    ASSERT_NE(d, nullptr) << info.id;
    EXPECT_EQ(d->kind, info.kind) << info.id;
    ASSERT_EQ(d->hyperparams.size(), info.hp_rules.size()) << info.id;
    for (std::size_t i = 0; i < info.hp_rules.size(); ++i) {
      const auto* rule = g.Find(info.hp_rules[i]);
      EXPECT_EQ(info.id + "::" + d->hyperparams[i].name, rule->name);
      EXPECT_EQ(d->hyperparams[i].kind, rule->kind);
      EXPECT_EQ(d->hyperparams[i].values, rule->values);
      EXPECT_EQ(d->hyperparams[i].lo, rule->lo);
      EXPECT_EQ(d->hyperparams[i].hi, rule->hi);
    }
  }
}

TEST(FitPipelineTest, ScalerAndNaiveBayes) {
  Rng rng(1);
  const Dataset d = Blobs(30, 3, 4, 1.0, 7);
  const auto fitted = FitPipeline(
      Workflow({{"standardScaler", {}}, {"gaussianNB", {{"priors", std::string("empirical")}}}}), d,
      rng);
  ASSERT_EQ(fitted.size(), 2u);
  EXPECT_FALSE(fitted[0]->IsClassifier());
  EXPECT_TRUE(fitted[1]->IsClassifier());
  EXPECT_EQ(PredictPipeline(fitted, d.features).size(), d.rows());
}

TEST(FitPipelineTest, MultinomialNbRejectsNegativeValues) {
  Rng rng(1);
  Dataset d = Blobs(10, 2, 2, 1.0, 3);
  d.features(0, 0) = -1.0;
  try {
    FitPipeline(Workflow({{"multinomialNB", {}}}), d, rng);
    FAIL() << "expected AlgorithmFailure";
  } catch (const AlgorithmFailure& e) {
    EXPECT_EQ(e.algorithm(), "multinomialNB");
  }
}

TEST(FitStepTest, RandomUndersamplingToMinority) {
  Rng rng(1);
  TrainingData data;
  data.features = Matrix::Random(150, 3);
  data.labels.assign(100, 0);
  data.labels.insert(data.labels.end(), 50, 1);
  data.num_classes = 2;
  const auto step = FitStep({"rus", {{"sampling_strategy", std::string("majority")}}}, data, rng);
  ASSERT_EQ(data.labels.size(), 100u);
  EXPECT_EQ(std::count(data.labels.begin(), data.labels.end(), 0), 50);
  EXPECT_EQ(data.features.rows(), 100);
  // Samplers are the identity at prediction time.
  const Matrix x = Matrix::Random(4, 3);
  EXPECT_EQ(step->Transform(x), x);
}

TEST(FitStepTest, RandomOversamplingToMajority) {
  Rng rng(1);
  TrainingData data;
  data.features = Matrix::Random(130, 2);
  data.labels.assign(100, 0);
  data.labels.insert(data.labels.end(), 30, 1);
  data.num_classes = 2;
  FitStep({"ros", {{"sampling_strategy", std::string("minority")}}}, data, rng);
  EXPECT_EQ(data.labels.size(), 200u);
}

TEST(PredictPipelineTest, BareClassifier) {
  Rng rng(1);
  const Dataset d = Blobs(20, 2, 2, 0.5, 1);
  const auto fitted = FitPipeline(Workflow({Knn(1)}), d, rng);
  ASSERT_EQ(fitted.size(), 1u);
  EXPECT_EQ(PredictPipeline(fitted, d.features), d.labels);
}

TEST(PredictPipelineTest, IdenticalRowsIdenticalPredictions) {
  Rng rng(1);
  const Dataset d = Blobs(20, 3, 3, 2.0, 2);
  const auto fitted = FitPipeline(
      Workflow({{"pca", {{"n_components", std::int64_t{2}}}},
                {"logisticRegression", {{"C", 1.0}, {"penalty", std::string("l2")}}}}),
      d, rng);
  Matrix x(3, 3);
  x.row(0) = d.features.row(5);
  x.row(1) = d.features.row(5);
  x.row(2) = d.features.row(5);
  const Labels p = PredictPipeline(fitted, x);
  EXPECT_EQ(p[0], p[1]);
  EXPECT_EQ(p[1], p[2]);
}

TEST(PredictPipelineTest, PcaThenOneNeighbourReproducesTraining) {
  Rng rng(1);
  const Dataset d = Blobs(25, 3, 4, 1.5, 9);
  const auto fitted =
      FitPipeline(Workflow({{"pca", {{"n_components", std::int64_t{4}}}}, Knn(1)}), d, rng);
  EXPECT_EQ(PredictPipeline(fitted, d.features), d.labels);
}

TEST(PredictPipelineTest, WidthMismatch) {
  Rng rng(1);
  const Dataset d = Blobs(10, 2, 3, 1.0, 1);
  const auto fitted = FitPipeline(Workflow({Knn(1)}), d, rng);
  EXPECT_THROW(PredictPipeline(fitted, Matrix::Zero(2, 5)), InvalidArgument);
}

TEST(FitPipelineTest, ClassifierMustBeLast) {
  Rng rng(1);
  const Dataset d = Blobs(10, 2, 3, 1.0, 1);
  EXPECT_THROW(FitPipeline(Workflow({Knn(1), {"standardScaler", {}}}), d, rng), InvalidArgument);
}

// Independent Gaussian naive Bayes written with scalar loops.
Labels NaiveBayesOracle(const Dataset& train, const Matrix& x) {
  const int k = train.num_classes();
  const auto d = train.features.cols();
  const auto n = train.features.rows();
  double max_var = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) mean += train.features(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) var += std::pow(train.features(i, j) - mean, 2);
    max_var = std::max(max_var, var / static_cast<double>(n));
  }
  std::vector<std::vector<double>> mu(k, std::vector<double>(d, 0.0)), var = mu;
  std::vector<int> count(k, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = train.labels[i];
    ++count[c];
    for (Eigen::Index j = 0; j < d; ++j) mu[c][j] += train.features(i, j);
  }
  for (int c = 0; c < k; ++c)
    for (Eigen::Index j = 0; j < d; ++j) mu[c][j] /= count[c];
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = train.labels[i];
    for (Eigen::Index j = 0; j < d; ++j) var[c][j] += std::pow(train.features(i, j) - mu[c][j], 2);
  }
  for (int c = 0; c < k; ++c)
    for (Eigen::Index j = 0; j < d; ++j) var[c][j] = var[c][j] / count[c] + 1e-9 * max_var;
  Labels out;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      double s = std::log(static_cast<double>(count[c]) / static_cast<double>(n));
      for (Eigen::Index j = 0; j < d; ++j) {
        s += -0.5 * std::log(2 * std::numbers::pi * var[c][j]) -
             0.5 * std::pow(x(r, j) - mu[c][j], 2) / var[c][j];
      }
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    out.push_back(best);
  }
  return out;
}

TEST(GaussianNbTest, MatchesScalarOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset train = Blobs(15, 3, 4, 3.0, seed);
    const Dataset probe = Blobs(10, 3, 4, 4.0, seed + 100);
    Rng rng(seed);
    const auto fitted = FitPipeline(Workflow({{"gaussianNB", {{"priors", std::string("empirical")}}}}),
                                    train, rng);
    EXPECT_EQ(PredictPipeline(fitted, probe.features), NaiveBayesOracle(train, probe.features))
        << "seed " << seed;
  }
}

// Brute-force nearest neighbour with index tie-breaking.
Labels NearestOracle(const Dataset& train, const Matrix& x) {
  Labels out;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < train.features.rows(); ++i) {
      const double d = (train.features.row(i) - x.row(r)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    out.push_back(train.labels[best]);
  }
  return out;
}

TEST(KnnTest, OneNeighbourMatchesBruteForce) {
  const Dataset train = Blobs(20, 4, 3, 3.0, 4);
  const Dataset probe = Blobs(10, 4, 3, 3.0, 5);
  Rng rng(1);
  const auto fitted = FitPipeline(Workflow({Knn(1)}), train, rng);
  EXPECT_EQ(PredictPipeline(fitted, probe.features), NearestOracle(train, probe.features));
}

TEST(StandardScalerTest, ZeroMeanUnitSampleVariance) {
  Rng rng(1);
  TrainingData data{Matrix::Random(40, 3) * 5.0, Labels(40, 0), 2};
  for (int i = 0; i < 20; ++i) data.labels[i] = 1;
  FitStep({"standardScaler", {}}, data, rng);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const auto col = data.features.col(j);
    EXPECT_NEAR(col.mean(), 0.0, 1e-12);
    EXPECT_NEAR((col.array() - col.mean()).square().sum() / 39.0, 1.0, 1e-12);
  }
}

TEST(MinMaxScalerTest, UnitRange) {
  Rng rng(1);
  TrainingData data{Matrix::Random(30, 2) * 3.0, Labels(30, 0), 2};
  data.labels[0] = 1;
  FitStep({"minMaxScaler", {}}, data, rng);
  EXPECT_DOUBLE_EQ(data.features.minCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(data.features.maxCoeff(), 1.0);
}

TEST(LdaTest, SingularScatterFails) {
  Rng rng(1);
  Dataset d;
  d.features = Matrix::Zero(10, 2);
  for (int i = 0; i < 10; ++i) d.features(i, 0) = d.features(i, 1) = i < 5 ? 0.0 : 1.0;
  for (int i = 0; i < 10; ++i) d.labels.push_back(i < 5 ? 0 : 1);
  d.class_names = {"a", "b"};
  EXPECT_THROW(FitPipeline(Workflow({{"lda", {{"shrinkage", 0.0}}}}), d, rng), AlgorithmFailure);
}

TEST(TreeTest, DepthOneSplitsSeparableData) {
  Rng rng(1);
  const Dataset d = Blobs(20, 2, 2, 0.3, 1);
  const auto fitted = FitPipeline(
      Workflow({{"decisionTree", {{"criterion", std::string("gini")}, {"maxDepth", std::int64_t{1}}}}}),
      d, rng);
  EXPECT_EQ(PredictPipeline(fitted, d.features), d.labels);
}

// Every primitive either fits and predicts in-range labels or reports an
// AlgorithmFailure.
TEST(CatalogTest, RandomPipelinesFitOrFailCleanly) {
  const Dataset d = Blobs(20, 3, 5, 1.5, 21);
  search::Rng rng(8);
  std::set<std::string> fitted_algorithms;
  for (int i = 0; i < 300; ++i) {
    const auto ind = search::RandomIndividual(grammar::DefaultGrammar(), 13, rng);
    try {
      const auto fitted = FitPipeline(ind.workflow, d, rng);
      const Labels p = PredictPipeline(fitted, d.features);
      ASSERT_EQ(p.size(), d.rows());
      for (int label : p) ASSERT_TRUE(label >= 0 && label < 3) << ind.workflow.canonical_key;
      for (const auto& s : ind.workflow.steps) fitted_algorithms.insert(s.algorithm);
    } catch (const AlgorithmFailure&) {
    }
  }
  EXPECT_EQ(fitted_algorithms.size(), 20u);
}

}  // namespace
}  // namespace evoflow::ml
