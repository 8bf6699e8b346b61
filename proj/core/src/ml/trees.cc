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
#include <numeric>
#include <random>

#include "ml/internal.h"

namespace evoflow::ml::internal {
namespace {

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Vector distribution;
};

double Impurity(const std::vector<double>& counts, double total, bool entropy) {
  if (total <= 0.0) return 0.0;
  double acc = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    acc += entropy ? -p * std::log2(p) : p * p;
  }
  return entropy ? acc : 1.0 - acc;
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingData& data, bool entropy, int max_depth, Rng* rng)
      : data_(data), entropy_(entropy), max_depth_(max_depth), rng_(rng) {}

  std::vector<Node> Build() {
    std::vector<std::size_t> rows(data_.labels.size());
    std::iota(rows.begin(), rows.end(), 0);
    Grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // weighted child impurity
  };

  std::vector<double> Counts(const std::vector<std::size_t>& rows) const {
    std::vector<double> counts(static_cast<std::size_t>(data_.num_classes), 0.0);
    for (auto r : rows) counts[data_.labels[r]] += 1.0;
    return counts;
  }

  // Evaluates one threshold for a feature.
  double Score(const std::vector<std::size_t>& rows, int feature,
               double threshold) const {
    std::vector<double> left(static_cast<std::size_t>(data_.num_classes), 0.0);
    std::vector<double> right = left;
    double nl = 0.0, nr = 0.0;
    for (auto r : rows) {
      if (data_.features(static_cast<Eigen::Index>(r), feature) <= threshold) {
        left[data_.labels[r]] += 1.0;
        nl += 1.0;
      } else {
        right[data_.labels[r]] += 1.0;
        nr += 1.0;
      }
    }
    if (nl == 0.0 || nr == 0.0) return std::numeric_limits<double>::infinity();
    return (nl * Impurity(left, nl, entropy_) + nr * Impurity(right, nr, entropy_)) /
           (nl + nr);
  }

  Split BestExhaustive(const std::vector<std::size_t>& rows) const {
    Split best{-1, 0.0, std::numeric_limits<double>::infinity()};
    const auto classes = static_cast<std::size_t>(data_.num_classes);
    const double n = static_cast<double>(rows.size());
    std::vector<std::pair<double, int>> column(rows.size());
    for (Eigen::Index f = 0; f < data_.features.cols(); ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        column[i] = {data_.features(static_cast<Eigen::Index>(rows[i]), f),
                     data_.labels[rows[i]]};
      }
      std::sort(column.begin(), column.end());
      std::vector<double> left(classes, 0.0);
      std::vector<double> right = Counts(rows);
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left[column[i].second] += 1.0;
        right[column[i].second] -= 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double score =
            (nl * Impurity(left, nl, entropy_) + nr * Impurity(right, nr, entropy_)) / n;
        if (score < best.score) {
          best = {static_cast<int>(f), 0.5 * (column[i].first + column[i + 1].first),
                  score};
        }
      }
    }
    return best;
  }

  Split BestRandom(const std::vector<std::size_t>& rows) const {
    Split best{-1, 0.0, std::numeric_limits<double>::infinity()};
    for (Eigen::Index f = 0; f < data_.features.cols(); ++f) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (auto r : rows) {
        const double v = data_.features(static_cast<Eigen::Index>(r), f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(hi > lo)) continue;
      double threshold = std::uniform_real_distribution<double>(lo, hi)(*rng_);
      if (threshold >= hi) threshold = lo;
      const double score = Score(rows, static_cast<int>(f), threshold);
      if (score < best.score) best = {static_cast<int>(f), threshold, score};
    }
    return best;
  }

  int Grow(const std::vector<std::size_t>& rows, int depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const auto counts = Counts(rows);
    const double n = static_cast<double>(rows.size());
    Vector distribution(data_.num_classes);
    for (int c = 0; c < data_.num_classes; ++c) distribution[c] = counts[c] / n;
    nodes_[index].distribution = distribution;

    const double parent = Impurity(counts, n, entropy_);
    if (depth >= max_depth_ || rows.size() < 2 || parent <= 0.0) return index;
    const Split split = rng_ ? BestRandom(rows) : BestExhaustive(rows);
    if (split.feature < 0 || !(split.score < parent)) return index;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (data_.features(static_cast<Eigen::Index>(r), split.feature) <= split.threshold
           ? left
           : right)
          .push_back(r);
    }
    const int l = Grow(left, depth + 1);
    const int r = Grow(right, depth + 1);
    nodes_[index].feature = split.feature;
    nodes_[index].threshold = split.threshold;
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
  }

  const TrainingData& data_;
  bool entropy_;
  int max_depth_;
  Rng* rng_;
  std::vector<Node> nodes_;
};

StepPtr FitTree(const WorkflowStep& step, const TrainingData& data, Rng* rng) {
  const std::string criterion = step.GetString("criterion", "gini");
  if (criterion != "gini" && criterion != "entropy") {
    throw InvalidArgument(step.algorithm + ": unknown criterion '" + criterion + "'");
  }
  if (data.labels.empty()) throw AlgorithmFailure(step.algorithm, "no training rows");
  const int max_depth = static_cast<int>(std::max<std::int64_t>(step.GetInt("maxDepth", 5), 1));
  auto nodes = std::make_shared<const std::vector<Node>>(
      TreeBuilder(data, criterion == "entropy", max_depth, rng).Build());
  auto scores = [nodes](const Matrix& x) -> Matrix {
    const auto classes = (*nodes)[0].distribution.size();
    Matrix out(x.rows(), classes);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      int at = 0;
      while ((*nodes)[at].feature >= 0) {
        const Node& node = (*nodes)[at];
        at = x(r, node.feature) <= node.threshold ? node.left : node.right;
      }
      out.row(r) = (*nodes)[at].distribution.transpose();
    }
    return out;
  };
  return std::make_shared<ScoringClassifier>(
      step.algorithm, static_cast<std::size_t>(data.features.cols()), scores);
}

}  // namespace

StepPtr FitDecisionTree(const WorkflowStep& step, const TrainingData& data) {
  return FitTree(step, data, nullptr);
}

StepPtr FitExtraTree(const WorkflowStep& step, const TrainingData& data,
                     Rng& rng) {
  return FitTree(step, data, &rng);
}

}  // namespace evoflow::ml::internal
