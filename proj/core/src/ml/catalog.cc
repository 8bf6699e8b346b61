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

#include <functional>
#include <unordered_map>

#include "ml/internal.h"

namespace evoflow::ml {
namespace {

using grammar::RuleKind;
using internal::StepPtr;

HyperparamSpec Cat(std::string name, std::vector<std::string> values) {
  return {std::move(name), RuleKind::kCategorical, std::move(values), 0.0, 0.0};
}
HyperparamSpec Int(std::string name, double lo, double hi) {
  return {std::move(name), RuleKind::kInteger, {}, lo, hi};
}
HyperparamSpec Real(std::string name, double lo, double hi) {
  return {std::move(name), RuleKind::kReal, {}, lo, hi};
}

std::vector<AlgorithmDescriptor> BuildCatalog() {
  constexpr auto kPre = AlgorithmKind::kPreprocessor;
  constexpr auto kCls = AlgorithmKind::kClassifier;
  return {
      {"standardScaler", kPre, {}},
      {"minMaxScaler", kPre, {}},
      {"varianceThreshold", kPre, {Real("threshold", 0, 0.2)}},
      {"selectKBest", kPre, {Int("k", 1, 10), Cat("score_func", {"f_classif", "chi2"})}},
      {"pca", kPre, {Int("n_components", 1, 10), Cat("whiten", {"false", "true"})}},
      {"truncatedSVD", kPre, {Int("n_components", 1, 10)}},
      {"fastICA", kPre,
       {Int("n_components", 1, 10), Cat("algorithm", {"parallel", "deflation"})}},
      {"fagg", kPre,
       {Int("n_clusters", 1, 10), Cat("linkage", {"ward", "complete", "average"})}},
      {"rus", kPre, {Cat("sampling_strategy", {"majority", "not_minority", "all"})}},
      {"ros", kPre, {Cat("sampling_strategy", {"minority", "not_majority", "all"})}},
      {"kNN", kCls,
       {Int("n_neighbors", 1, 30), Cat("weights", {"uniform", "distance"}),
        Cat("metric", {"euclidean", "manhattan"})}},
      {"decisionTree", kCls, {Cat("criterion", {"gini", "entropy"}), Int("maxDepth", 1, 20)}},
      {"logisticRegression", kCls, {Cat("penalty", {"l1", "l2"}), Real("C", 0.01, 10)}},
      {"gaussianNB", kCls, {Cat("priors", {"empirical", "uniform"})}},
      {"multinomialNB", kCls, {Real("alpha", 0.01, 1), Cat("fit_prior", {"true", "false"})}},
      {"lda", kCls, {Real("shrinkage", 0, 0.9)}},
      {"lsvc", kCls, {Cat("penalty", {"l1", "l2"}), Real("C", 0.01, 10)}},
      {"passiveAggressiveClassifier", kCls,
       {Real("C", 0.01, 10), Cat("loss", {"hinge", "squared_hinge"})}},
      {"extraTreeClassifier", kCls,
       {Cat("criterion", {"gini", "entropy"}), Int("maxDepth", 1, 20)}},
      {"mlpClassifier", kCls,
       {Int("hidden_units", 5, 50), Cat("activation", {"relu", "tanh", "logistic"}),
        Real("alpha", 0.00001, 0.01)}},
  };
}

using FitFn = std::function<StepPtr(const WorkflowStep&, TrainingData&, Rng&)>;

const std::unordered_map<std::string, FitFn>& Registry() {
  using namespace internal;
  static const auto* registry = new std::unordered_map<std::string, FitFn>{
      {"standardScaler", [](auto& s, auto& d, auto&) { return FitStandardScaler(s, d); }},
      {"minMaxScaler", [](auto& s, auto& d, auto&) { return FitMinMaxScaler(s, d); }},
      {"varianceThreshold",
       [](auto& s, auto& d, auto&) { return FitVarianceThreshold(s, d); }},
      {"selectKBest", [](auto& s, auto& d, auto&) { return FitSelectKBest(s, d); }},
      {"pca", [](auto& s, auto& d, auto& r) { return FitPca(s, d, r); }},
      {"truncatedSVD", [](auto& s, auto& d, auto& r) { return FitTruncatedSvd(s, d, r); }},
      {"fastICA", [](auto& s, auto& d, auto& r) { return FitFastIca(s, d, r); }},
      {"fagg", [](auto& s, auto& d, auto&) { return FitFeatureAgglomeration(s, d); }},
      {"rus", [](auto& s, auto& d, auto& r) { return FitRandomUnderSampler(s, d, r); }},
      {"ros", [](auto& s, auto& d, auto& r) { return FitRandomOverSampler(s, d, r); }},
      {"kNN", [](auto& s, auto& d, auto&) { return FitKnn(s, d); }},
      {"decisionTree", [](auto& s, auto& d, auto&) { return FitDecisionTree(s, d); }},
      {"logisticRegression",
       [](auto& s, auto& d, auto& r) { return FitLogisticRegression(s, d, r); }},
      {"gaussianNB", [](auto& s, auto& d, auto&) { return FitGaussianNb(s, d); }},
      {"multinomialNB", [](auto& s, auto& d, auto&) { return FitMultinomialNb(s, d); }},
      {"lda", [](auto& s, auto& d, auto&) { return FitLda(s, d); }},
      {"lsvc", [](auto& s, auto& d, auto& r) { return FitLinearSvc(s, d, r); }},
      {"passiveAggressiveClassifier",
       [](auto& s, auto& d, auto& r) { return FitPassiveAggressive(s, d, r); }},
      {"extraTreeClassifier", [](auto& s, auto& d, auto& r) { return FitExtraTree(s, d, r); }},
      {"mlpClassifier", [](auto& s, auto& d, auto& r) { return FitMlp(s, d, r); }},
  };
  return *registry;
}

}  // namespace

const std::vector<AlgorithmDescriptor>& Catalog() {
  static const auto* catalog = new std::vector<AlgorithmDescriptor>(BuildCatalog());
  return *catalog;
}

const AlgorithmDescriptor* FindDescriptor(std::string_view id) {
  for (const auto& d : Catalog()) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

std::shared_ptr<const FittedStep> FitStep(const WorkflowStep& step,
                                          TrainingData& data, Rng& rng) {
  const auto& registry = Registry();
  const auto it = registry.find(step.algorithm);
  if (it == registry.end()) {
    throw InvalidArgument("unknown algorithm '" + step.algorithm + "'");
  }
  if (data.labels.empty() || data.features.cols() == 0) {
    throw AlgorithmFailure(step.algorithm, "empty training data");
  }
  return it->second(step, data, rng);
}

FittedPipeline FitPipeline(const WorkflowSpec& workflow, const Matrix& features,
                           const Labels& labels, int num_classes, Rng& rng) {
  if (workflow.steps.empty()) throw InvalidArgument("empty workflow");
  TrainingData data{features, labels, num_classes};
  FittedPipeline out;
  out.reserve(workflow.steps.size());
  for (std::size_t i = 0; i < workflow.steps.size(); ++i) {
    const auto* descriptor = FindDescriptor(workflow.steps[i].algorithm);
    if (descriptor == nullptr) {
      throw InvalidArgument("unknown algorithm '" + workflow.steps[i].algorithm + "'");
    }
    const bool last = i + 1 == workflow.steps.size();
    if ((descriptor->kind == AlgorithmKind::kClassifier) != last) {
      throw InvalidArgument("workflow '" + workflow.canonical_key +
                            "' must end with exactly one classifier");
    }
    out.push_back(FitStep(workflow.steps[i], data, rng));
  }
  return out;
}

FittedPipeline FitPipeline(const WorkflowSpec& workflow, const Dataset& train,
                           Rng& rng) {
  return FitPipeline(workflow, train.features, train.labels, train.num_classes(), rng);
}

Labels PredictPipeline(const FittedPipeline& steps, const Matrix& features) {
  if (steps.empty()) throw InvalidArgument("empty pipeline");
  Matrix current = features;
  for (const auto& step : steps) {
    if (static_cast<std::size_t>(current.cols()) != step->input_width()) {
      throw InvalidArgument(step->algorithm() + " expects " +
                            std::to_string(step->input_width()) + " features, got " +
                            std::to_string(current.cols()));
    }
    if (step->IsClassifier()) return step->Predict(current);
    current = step->Transform(current);
    internal::RequireFinite(current, step->algorithm());
  }
  throw InvalidArgument("pipeline has no classifier");
}

}  // namespace evoflow::ml
