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

// Declarations shared by the ml translation units.

#ifndef EVOFLOW_ML_INTERNAL_H_
#define EVOFLOW_ML_INTERNAL_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "evoflow/errors.h"
#include "evoflow/ml.h"

namespace evoflow::ml::internal {

using StepPtr = std::shared_ptr<const FittedStep>;

// Eigen-decomposition of a symmetric positive semi-definite matrix by power
// iteration with deflation. Columns of `vectors` are orthonormal; values are
// in decreasing order.
struct EigenPairs {
  Vector values;
  Matrix vectors;
};
inline constexpr double kPowerTolerance = 1e-7;
inline constexpr int kPowerMaxIterations = 500;
EigenPairs TopEigenpairs(const Matrix& symmetric, int k, Rng& rng);

Vector ColumnMeans(const Matrix& x);
// Per-column variance with the given delta degrees of freedom.
Vector ColumnVariances(const Matrix& x, int ddof);
std::vector<int> ClassCounts(const Labels& labels, int num_classes);
// Lowest index among the maxima.
int ArgMax(const Vector& scores);
void RequireFinite(const Matrix& m, const std::string& algorithm);

// Preprocessors.
StepPtr FitStandardScaler(const WorkflowStep& step, TrainingData& data);
StepPtr FitMinMaxScaler(const WorkflowStep& step, TrainingData& data);
StepPtr FitVarianceThreshold(const WorkflowStep& step, TrainingData& data);
StepPtr FitSelectKBest(const WorkflowStep& step, TrainingData& data);
StepPtr FitPca(const WorkflowStep& step, TrainingData& data, Rng& rng);
StepPtr FitTruncatedSvd(const WorkflowStep& step, TrainingData& data, Rng& rng);
StepPtr FitFastIca(const WorkflowStep& step, TrainingData& data, Rng& rng);
StepPtr FitFeatureAgglomeration(const WorkflowStep& step, TrainingData& data);
StepPtr FitRandomUnderSampler(const WorkflowStep& step, TrainingData& data,
                              Rng& rng);
StepPtr FitRandomOverSampler(const WorkflowStep& step, TrainingData& data,
                             Rng& rng);

// Classifiers.
StepPtr FitKnn(const WorkflowStep& step, const TrainingData& data);
StepPtr FitDecisionTree(const WorkflowStep& step, const TrainingData& data);
StepPtr FitExtraTree(const WorkflowStep& step, const TrainingData& data,
                     Rng& rng);
StepPtr FitGaussianNb(const WorkflowStep& step, const TrainingData& data);
StepPtr FitMultinomialNb(const WorkflowStep& step, const TrainingData& data);
StepPtr FitLda(const WorkflowStep& step, const TrainingData& data);
StepPtr FitLogisticRegression(const WorkflowStep& step,
                              const TrainingData& data, Rng& rng);
StepPtr FitLinearSvc(const WorkflowStep& step, const TrainingData& data,
                     Rng& rng);
StepPtr FitPassiveAggressive(const WorkflowStep& step,
                             const TrainingData& data, Rng& rng);
StepPtr FitMlp(const WorkflowStep& step, const TrainingData& data, Rng& rng);

// A fitted preprocessing step defined by a closure over its learned state.
class FunctionTransformer : public FittedStep {
 public:
  using Fn = std::function<Matrix(const Matrix&)>;
  FunctionTransformer(AlgorithmId id, std::size_t input_width, Fn fn)
      : FittedStep(std::move(id), input_width), fn_(std::move(fn)) {}
  bool IsClassifier() const override { return false; }
  Matrix Transform(const Matrix& features) const override { return fn_(features); }

 private:
  Fn fn_;
};

// Classifier predicting the argmax of per-class scores; classes absent from
// training get -inf scores.
class ScoringClassifier : public FittedStep {
 public:
  using Fn = std::function<Matrix(const Matrix&)>;  // rows x num_classes
  ScoringClassifier(AlgorithmId id, std::size_t input_width, Fn scores)
      : FittedStep(std::move(id), input_width), scores_(std::move(scores)) {}
  bool IsClassifier() const override { return true; }
  Labels Predict(const Matrix& features) const override;

 private:
  Fn scores_;
};

}  // namespace evoflow::ml::internal

#endif  // EVOFLOW_ML_INTERNAL_H_
