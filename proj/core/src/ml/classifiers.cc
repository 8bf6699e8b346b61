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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "ml/internal.h"

namespace evoflow::ml::internal {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t Width(const TrainingData& data) {
  return static_cast<std::size_t>(data.features.cols());
}

Matrix ClassMeans(const TrainingData& data, const std::vector<int>& counts) {
  Matrix means = Matrix::Zero(data.num_classes, data.features.cols());
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    means.row(data.labels[static_cast<std::size_t>(i)]) += data.features.row(i);
  }
  for (int c = 0; c < data.num_classes; ++c) {
    if (counts[c] > 0) means.row(c) /= counts[c];
  }
  return means;
}

Vector LogPriors(const std::vector<int>& counts, bool empirical) {
  Vector out = Vector::Constant(static_cast<Eigen::Index>(counts.size()), kNegInf);
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const auto present = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; });
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    out[static_cast<Eigen::Index>(c)] =
        empirical ? std::log(counts[c] / total) : -std::log(static_cast<double>(present));
  }
  return out;
}

}  // namespace

StepPtr FitKnn(const WorkflowStep& step, const TrainingData& data) {
  const std::string weights = step.GetString("weights", "uniform");
  const std::string metric = step.GetString("metric", "euclidean");
  if (weights != "uniform" && weights != "distance") {
    throw InvalidArgument("kNN: unknown weights '" + weights + "'");
  }
  if (metric != "euclidean" && metric != "manhattan") {
    throw InvalidArgument("kNN: unknown metric '" + metric + "'");
  }
  if (data.labels.empty()) throw AlgorithmFailure(step.algorithm, "no training rows");
  const auto k = static_cast<std::size_t>(std::clamp<std::int64_t>(
      step.GetInt("n_neighbors", 5), 1, static_cast<std::int64_t>(data.labels.size())));
  const Matrix train = data.features;
  const Labels labels = data.labels;
  const int classes = data.num_classes;
  const bool by_distance = weights == "distance";
  const bool manhattan = metric == "manhattan";

  auto scores = [=](const Matrix& x) -> Matrix {
    Matrix out(x.rows(), classes);
    const auto n = static_cast<std::size_t>(train.rows());
    std::vector<double> dist(n);
    std::vector<std::size_t> order(n);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto diff = train.row(static_cast<Eigen::Index>(i)) - x.row(r);
        dist[i] = manhattan ? diff.cwiseAbs().sum() : diff.norm();
      }
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                        order.end(), [&](std::size_t a, std::size_t b) {
                          return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                        });
      Vector votes = Vector::Zero(classes);
      bool exact = false;
      if (by_distance) {
        for (std::size_t j = 0; j < k; ++j) exact = exact || dist[order[j]] == 0.0;
      }
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t i = order[j];
        double w = 1.0;
        if (by_distance) w = exact ? (dist[i] == 0.0 ? 1.0 : 0.0) : 1.0 / dist[i];
        votes[labels[i]] += w;
      }
      out.row(r) = votes.transpose();
    }
    return out;
  };
  return std::make_shared<ScoringClassifier>(step.algorithm, Width(data), scores);
}

StepPtr FitGaussianNb(const WorkflowStep& step, const TrainingData& data) {
  const std::string priors = step.GetString("priors", "empirical");
  if (priors != "empirical" && priors != "uniform") {
    throw InvalidArgument("gaussianNB: unknown priors '" + priors + "'");
  }
  const auto counts = ClassCounts(data.labels, data.num_classes);
  const Matrix means = ClassMeans(data, counts);
  Matrix vars = Matrix::Zero(data.num_classes, data.features.cols());
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    const int c = data.labels[static_cast<std::size_t>(i)];
    vars.row(c) += (data.features.row(i) - means.row(c)).cwiseAbs2();
  }
  for (int c = 0; c < data.num_classes; ++c) {
    if (counts[c] > 0) vars.row(c) /= counts[c];
  }
  const double epsilon =
      1e-9 * std::max(ColumnVariances(data.features, 0).maxCoeff(), 0.0);
  vars.array() += epsilon;
  if (!(vars.minCoeff() > 0.0)) {
    throw AlgorithmFailure(step.algorithm, "zero variance feature");
  }
  const Vector log_prior = LogPriors(counts, priors == "empirical");
  const Vector log_norm =
      -0.5 * (vars.array() * 2.0 * std::numbers::pi).log().rowwise().sum();

  auto scores = [=](const Matrix& x) -> Matrix {
    Matrix out(x.rows(), means.rows());
    for (Eigen::Index c = 0; c < means.rows(); ++c) {
      if (log_prior[c] == kNegInf) {
        out.col(c).setConstant(kNegInf);
        continue;
      }
      const Matrix diff = x.rowwise() - means.row(c);
      const Vector quad =
          (diff.array().square().rowwise() / vars.row(c).array()).rowwise().sum();
      out.col(c) = (log_prior[c] + log_norm[c]) - 0.5 * quad.array();
    }
    return out;
  };
  return std::make_shared<ScoringClassifier>(step.algorithm, Width(data), scores);
}

StepPtr FitMultinomialNb(const WorkflowStep& step, const TrainingData& data) {
  const double alpha = step.GetReal("alpha", 1.0);
  const bool fit_prior = step.GetString("fit_prior", "true") == "true";
  if (data.features.size() > 0 && data.features.minCoeff() < 0.0) {
    throw AlgorithmFailure(step.algorithm, "negative feature values");
  }
  const auto counts = ClassCounts(data.labels, data.num_classes);
  Matrix totals = Matrix::Zero(data.num_classes, data.features.cols());
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    totals.row(data.labels[static_cast<std::size_t>(i)]) += data.features.row(i);
  }
  totals.array() += alpha;
  const Vector row_sums = totals.rowwise().sum();
  Matrix log_theta = totals;
  for (Eigen::Index c = 0; c < log_theta.rows(); ++c) {
    log_theta.row(c) = (totals.row(c) / row_sums[c]).array().log();
  }
  const Vector log_prior = LogPriors(counts, fit_prior);

  auto scores = [=](const Matrix& x) -> Matrix {
    Matrix out = x * log_theta.transpose();
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      if (log_prior[c] == kNegInf) {
        out.col(c).setConstant(kNegInf);
      } else {
        out.col(c).array() += log_prior[c];
      }
    }
    return out;
  };
  return std::make_shared<ScoringClassifier>(step.algorithm, Width(data), scores);
}

StepPtr FitLda(const WorkflowStep& step, const TrainingData& data) {
  const double shrinkage = std::clamp(step.GetReal("shrinkage", 0.0), 0.0, 1.0);
  const auto counts = ClassCounts(data.labels, data.num_classes);
  const Matrix means = ClassMeans(data, counts);
  const Eigen::Index d = data.features.cols();
  const auto present = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; });
  Matrix within = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    const Vector diff = (data.features.row(i) -
                         means.row(data.labels[static_cast<std::size_t>(i)]))
                            .transpose();
    within.noalias() += diff * diff.transpose();
  }
  within /= std::max<double>(static_cast<double>(data.features.rows() - present), 1.0);
  const double trace = within.trace();
  if (!(trace > 1e-12)) {
    throw AlgorithmFailure(step.algorithm, "singular within-class scatter");
  }
  const Matrix identity = Matrix::Identity(d, d);
  const Matrix regularized = (1.0 - shrinkage) * within +
                             (shrinkage * trace / static_cast<double>(d) + 1e-6) * identity;
  const Eigen::LLT<Matrix> llt(regularized);
  if (llt.info() != Eigen::Success) {
    throw AlgorithmFailure(step.algorithm, "covariance is not positive definite");
  }
  const Matrix coef = llt.solve(means.transpose());  // d x K
  const Vector log_prior = LogPriors(counts, true);
  Vector intercept(data.num_classes);
  for (int c = 0; c < data.num_classes; ++c) {
    intercept[c] = log_prior[c] == kNegInf
                       ? kNegInf
                       : log_prior[c] - 0.5 * means.row(c).dot(coef.col(c));
  }
  RequireFinite(coef, step.algorithm);

  auto scores = [=](const Matrix& x) -> Matrix {
    Matrix out = x * coef;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      if (intercept[c] == kNegInf) {
        out.col(c).setConstant(kNegInf);
      } else {
        out.col(c).array() += intercept[c];
      }
    }
    return out;
  };
  return std::make_shared<ScoringClassifier>(step.algorithm, Width(data), scores);
}

}  // namespace evoflow::ml::internal
