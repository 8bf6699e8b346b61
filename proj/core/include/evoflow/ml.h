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

// Native preprocessing and classification primitives and the pipeline that
// chains them.

#ifndef EVOFLOW_ML_H_
#define EVOFLOW_ML_H_

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "evoflow/grammar.h"
#include "evoflow/search.h"

namespace evoflow::ml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;
using grammar::AlgorithmId;
using grammar::AlgorithmKind;
using search::Rng;
using search::WorkflowSpec;
using search::WorkflowStep;

// Rows are instances. Labels are indices into class_names.
struct Dataset {
  Matrix features;
  Labels labels;
  std::vector<std::string> class_names;
  std::string name;

  std::size_t rows() const { return labels.size(); }
  std::size_t columns() const { return static_cast<std::size_t>(features.cols()); }
  int num_classes() const { return static_cast<int>(class_names.size()); }
  // Number of distinct labels that actually occur.
  int PresentClasses() const;
  Dataset Subset(std::span<const std::size_t> rows) const;
  // Throws InvalidArgument unless rows match labels, labels are in range,
  // values are finite and at least two classes occur.
  void Check() const;
};

struct HyperparamSpec {
  std::string name;
  grammar::RuleKind kind = grammar::RuleKind::kCategorical;
  std::vector<std::string> values;  // kCategorical
  double lo = 0.0;                  // numeric kinds
  double hi = 0.0;

  bool operator==(const HyperparamSpec&) const = default;
};

struct AlgorithmDescriptor {
  AlgorithmId id;
  AlgorithmKind kind = AlgorithmKind::kPreprocessor;
  std::vector<HyperparamSpec> hyperparams;
};

// The 20 shipped primitives: 10 preprocessors followed by 10 classifiers.
const std::vector<AlgorithmDescriptor>& Catalog();
const AlgorithmDescriptor* FindDescriptor(std::string_view id);

// Training data flowing through a pipeline during fit. Samplers change rows,
// transformers change columns.
struct TrainingData {
  Matrix features;
  Labels labels;
  int num_classes = 0;
};

// Fitted state of one step; immutable after fit.
class FittedStep {
 public:
  FittedStep(AlgorithmId algorithm, std::size_t input_width)
      : algorithm_(std::move(algorithm)), input_width_(input_width) {}
  virtual ~FittedStep() = default;

  const AlgorithmId& algorithm() const { return algorithm_; }
  std::size_t input_width() const { return input_width_; }
  virtual bool IsClassifier() const = 0;

  // Preprocessors only. Samplers return their input unchanged.
  virtual Matrix Transform(const Matrix& features) const;
  // Classifiers only.
  virtual Labels Predict(const Matrix& features) const;

 private:
  AlgorithmId algorithm_;
  std::size_t input_width_;
};

using FittedPipeline = std::vector<std::shared_ptr<const FittedStep>>;

// Fits one step. Preprocessors replace `data` with their training output;
// classifiers leave it untouched. Throws AlgorithmFailure or
// InvalidArgument (unknown algorithm).
std::shared_ptr<const FittedStep> FitStep(const WorkflowStep& step,
                                          TrainingData& data, Rng& rng);

// Fits steps left to right, feeding each preprocessor's output to the next.
FittedPipeline FitPipeline(const WorkflowSpec& workflow, const Matrix& features,
                           const Labels& labels, int num_classes, Rng& rng);
FittedPipeline FitPipeline(const WorkflowSpec& workflow, const Dataset& train,
                           Rng& rng);

// Applies transforms in order, then the classifier. Throws InvalidArgument on
// feature-width mismatch and AlgorithmFailure on numerical breakdown.
Labels PredictPipeline(const FittedPipeline& steps, const Matrix& features);

}  // namespace evoflow::ml

#endif  // EVOFLOW_ML_H_
