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
#include <random>

#include "ml/internal.h"

namespace evoflow::ml {

int Dataset::PresentClasses() const {
  std::vector<bool> seen(static_cast<std::size_t>(std::max(num_classes(), 0)));
  int count = 0;
  for (int label : labels) {
    if (label >= 0 && label < num_classes() && !seen[label]) {
      seen[label] = true;
      ++count;
    }
  }
  return count;
}

Dataset Dataset::Subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.name = name;
  out.class_names = class_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) =
        features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

void Dataset::Check() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw InvalidArgument("dataset '" + name + "': feature rows (" +
                          std::to_string(features.rows()) +
                          ") differ from label count (" +
                          std::to_string(labels.size()) + ")");
  }
  if (features.cols() == 0) {
    throw InvalidArgument("dataset '" + name + "' has no features");
  }
  for (int label : labels) {
    if (label < 0 || label >= num_classes()) {
      throw InvalidArgument("dataset '" + name + "' has an out-of-range label");
    }
  }
  if (!features.allFinite()) {
    throw InvalidArgument("dataset '" + name + "' has missing or non-finite values");
  }
  if (PresentClasses() < 2) {
    throw InvalidArgument("dataset '" + name + "' needs at least two classes");
  }
}

Matrix FittedStep::Transform(const Matrix&) const {
  throw InvalidArgument(algorithm_ + " is not a preprocessor");
}

Labels FittedStep::Predict(const Matrix&) const {
  throw InvalidArgument(algorithm_ + " is not a classifier");
}

namespace internal {

Vector ColumnMeans(const Matrix& x) {
  if (x.rows() == 0) return Vector::Zero(x.cols());
  return x.colwise().mean().transpose();
}

Vector ColumnVariances(const Matrix& x, int ddof) {
  const Eigen::Index n = x.rows();
  if (n - ddof <= 0) return Vector::Zero(x.cols());
  const Matrix centered = x.rowwise() - x.colwise().mean();
  return (centered.array().square().colwise().sum() /
          static_cast<double>(n - ddof))
      .transpose();
}

std::vector<int> ClassCounts(const Labels& labels, int num_classes) {
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (int label : labels) ++counts[label];
  return counts;
}

int ArgMax(const Vector& scores) {
  int best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  }
  return best;
}

void RequireFinite(const Matrix& m, const std::string& algorithm) {
  if (!m.allFinite()) throw AlgorithmFailure(algorithm, "non-finite values");
}

EigenPairs TopEigenpairs(const Matrix& symmetric, int k, Rng& rng) {
  const Eigen::Index d = symmetric.rows();
  k = std::clamp<int>(k, 0, static_cast<int>(d));
  EigenPairs out{Vector::Zero(k), Matrix::Zero(d, k)};
  Matrix residual = symmetric;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::max(symmetric.cwiseAbs().maxCoeff(), 1e-300);

  const auto orthogonalize = [&](Vector& v, int upto) {
    for (int j = 0; j < upto; ++j) v -= out.vectors.col(j).dot(v) * out.vectors.col(j);
  };

  for (int c = 0; c < k; ++c) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = normal(rng);
    orthogonalize(v, c);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < kPowerMaxIterations; ++it) {
      Vector next = residual * v;
      orthogonalize(next, c);
      const double norm = next.norm();
      if (norm <= 1e-14 * scale) {  // remaining spectrum is numerically zero
        lambda = 0.0;
        break;
      }
      next /= norm;
      lambda = v.dot(residual * v);
      const double delta = std::min((next - v).norm(), (next + v).norm());
      v = next;
      if (delta < kPowerTolerance) break;
    }
    lambda = std::max(0.0, v.dot(residual * v));
    // Deterministic sign: largest-magnitude component positive.
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v[pivot] < 0) v = -v;
    out.values[c] = lambda;
    out.vectors.col(c) = v;
    residual -= lambda * v * v.transpose();
  }
  return out;
}

Labels ScoringClassifier::Predict(const Matrix& features) const {
  const Matrix scores = scores_(features);
  if (scores.hasNaN()) throw AlgorithmFailure(algorithm(), "non-finite scores");
  Labels out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = ArgMax(scores.row(i).transpose());
  }
  return out;
}

}  // namespace internal
}  // namespace evoflow::ml
