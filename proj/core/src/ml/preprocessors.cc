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

// Returns the step and replaces the training features with its output.
StepPtr Apply(std::shared_ptr<const FittedStep> step, TrainingData& data) {
  data.features = step->Transform(data.features);
  RequireFinite(data.features, step->algorithm());
  return step;
}

std::shared_ptr<const FittedStep> MakeTransformer(const std::string& id,
                                                  std::size_t width,
                                                  FunctionTransformer::Fn fn) {
  return std::make_shared<FunctionTransformer>(id, width, std::move(fn));
}

Matrix SelectColumns(const Matrix& x, const std::vector<Eigen::Index>& cols) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
  }
  return out;
}

int ComponentCount(const WorkflowStep& step, Eigen::Index width) {
  const auto requested = step.GetInt("n_components", 2);
  return static_cast<int>(std::clamp<std::int64_t>(requested, 1, width));
}

// Identity at predict time.
class Sampler : public FittedStep {
 public:
  using FittedStep::FittedStep;
  bool IsClassifier() const override { return false; }
  Matrix Transform(const Matrix& features) const override { return features; }
};

void Resample(TrainingData& data, const std::vector<std::size_t>& rows) {
  Matrix x(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  Labels y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        data.features.row(static_cast<Eigen::Index>(rows[i]));
    y[i] = data.labels[rows[i]];
  }
  data.features = std::move(x);
  data.labels = std::move(y);
}

// Present classes ordered by class id, with their row indices.
std::vector<std::pair<int, std::vector<std::size_t>>> RowsByClass(
    const TrainingData& data) {
  std::vector<std::vector<std::size_t>> rows(
      static_cast<std::size_t>(data.num_classes));
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    rows[data.labels[i]].push_back(i);
  }
  std::vector<std::pair<int, std::vector<std::size_t>>> out;
  for (int c = 0; c < data.num_classes; ++c) {
    if (!rows[c].empty()) out.emplace_back(c, std::move(rows[c]));
  }
  return out;
}

}  // namespace

StepPtr FitStandardScaler(const WorkflowStep& step, TrainingData& data) {
  const Vector mean = ColumnMeans(data.features);
  Vector scale = ColumnVariances(data.features, 1).cwiseSqrt();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale[j] > 0.0)) scale[j] = 1.0;
  }
  const auto width = static_cast<std::size_t>(data.features.cols());
  return Apply(MakeTransformer(step.algorithm, width,
                               [mean, scale](const Matrix& x) -> Matrix {
                                 return (x.rowwise() - mean.transpose())
                                     .array()
                                     .rowwise() /
                                     scale.transpose().array();
                               }),
               data);
}

StepPtr FitMinMaxScaler(const WorkflowStep& step, TrainingData& data) {
  const Vector lo = data.features.colwise().minCoeff().transpose();
  Vector range = data.features.colwise().maxCoeff().transpose() - lo;
  for (Eigen::Index j = 0; j < range.size(); ++j) {
    if (!(range[j] > 0.0)) range[j] = 1.0;
  }
  const auto width = static_cast<std::size_t>(data.features.cols());
  return Apply(MakeTransformer(step.algorithm, width,
                               [lo, range](const Matrix& x) -> Matrix {
                                 return (x.rowwise() - lo.transpose())
                                     .array()
                                     .rowwise() /
                                     range.transpose().array();
                               }),
               data);
}

StepPtr FitVarianceThreshold(const WorkflowStep& step, TrainingData& data) {
  const double threshold = step.GetReal("threshold", 0.0);
  const Vector variances = ColumnVariances(data.features, 0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < variances.size(); ++j) {
    if (variances[j] > threshold) keep.push_back(j);
  }
  if (keep.empty()) {
    throw AlgorithmFailure(step.algorithm, "no feature exceeds the variance threshold");
  }
  const auto width = static_cast<std::size_t>(data.features.cols());
  return Apply(MakeTransformer(step.algorithm, width,
                               [keep](const Matrix& x) { return SelectColumns(x, keep); }),
               data);
}

StepPtr FitSelectKBest(const WorkflowStep& step, TrainingData& data) {
  const Matrix& x = data.features;
  const Eigen::Index d = x.cols();
  const auto n = static_cast<double>(x.rows());
  const std::string score_func = step.GetString("score_func", "f_classif");
  const auto counts = ClassCounts(data.labels, data.num_classes);
  std::vector<double> scores(static_cast<std::size_t>(d), 0.0);

  if (score_func == "chi2") {
    if (x.minCoeff() < 0.0) {
      throw AlgorithmFailure(step.algorithm, "chi2 requires non-negative features");
    }
    Matrix observed = Matrix::Zero(data.num_classes, d);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      observed.row(data.labels[static_cast<std::size_t>(i)]) += x.row(i);
    }
    const Vector totals = x.colwise().sum().transpose();
    for (Eigen::Index j = 0; j < d; ++j) {
      double chi = 0.0;
      for (int c = 0; c < data.num_classes; ++c) {
        const double expected = totals[j] * counts[c] / n;
        if (expected > 0.0) {
          const double diff = observed(c, j) - expected;
          chi += diff * diff / expected;
        }
      }
      scores[static_cast<std::size_t>(j)] = chi;
    }
  } else if (score_func == "f_classif") {
    int present = 0;
    for (int c : counts) present += c > 0;
    Matrix sums = Matrix::Zero(data.num_classes, d);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      sums.row(data.labels[static_cast<std::size_t>(i)]) += x.row(i);
    }
    const Vector grand = ColumnMeans(x);
    Vector between = Vector::Zero(d);
    Vector within = Vector::Zero(d);
    for (int c = 0; c < data.num_classes; ++c) {
      if (counts[c] == 0) continue;
      const Vector mean_c = sums.row(c).transpose() / counts[c];
      between += counts[c] * (mean_c - grand).cwiseAbs2();
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int c = data.labels[static_cast<std::size_t>(i)];
      const Vector mean_c = sums.row(c).transpose() / counts[c];
      within += (x.row(i).transpose() - mean_c).cwiseAbs2();
    }
    const double df_between = std::max(present - 1, 1);
    const double df_within = std::max(n - present, 1.0);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double msb = between[j] / df_between;
      const double msw = within[j] / df_within;
      double f = 0.0;
      if (msw > 0.0) {
        f = msb / msw;
      } else if (msb > 0.0) {
        f = std::numeric_limits<double>::max();
      }
      scores[static_cast<std::size_t>(j)] = f;
    }
  } else {
    throw InvalidArgument("selectKBest: unknown score_func '" + score_func + "'");
  }

  const auto k = static_cast<std::size_t>(
      std::clamp<std::int64_t>(step.GetInt("k", 10), 1, d));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  order.resize(k);
  std::sort(order.begin(), order.end());
  const auto width = static_cast<std::size_t>(d);
  return Apply(MakeTransformer(step.algorithm, width,
                               [order](const Matrix& m) { return SelectColumns(m, order); }),
               data);
}

StepPtr FitPca(const WorkflowStep& step, TrainingData& data, Rng& rng) {
  const Matrix& x = data.features;
  const int k = ComponentCount(step, x.cols());
  const bool whiten = step.GetString("whiten", "false") == "true";
  const Vector mean = ColumnMeans(x);
  const Matrix centered = x.rowwise() - mean.transpose();
  const double denom = std::max<double>(static_cast<double>(x.rows()) - 1.0, 1.0);
  const Matrix covariance = centered.transpose() * centered / denom;
  const EigenPairs eig = TopEigenpairs(covariance, k, rng);
  Matrix projection = eig.vectors;
  if (whiten) {
    for (int c = 0; c < k; ++c) {
      const double sd = std::sqrt(eig.values[c]);
      projection.col(c) /= sd > 1e-12 ? sd : 1.0;
    }
  }
  const auto width = static_cast<std::size_t>(x.cols());
  return Apply(MakeTransformer(step.algorithm, width,
                               [mean, projection](const Matrix& m) -> Matrix {
                                 return (m.rowwise() - mean.transpose()) * projection;
                               }),
               data);
}

StepPtr FitTruncatedSvd(const WorkflowStep& step, TrainingData& data, Rng& rng) {
  const Matrix& x = data.features;
  const int k = ComponentCount(step, x.cols());
  const Matrix gram = x.transpose() * x;
  const Matrix components = TopEigenpairs(gram, k, rng).vectors;
  const auto width = static_cast<std::size_t>(x.cols());
  return Apply(MakeTransformer(step.algorithm, width,
                               [components](const Matrix& m) -> Matrix {
                                 return m * components;
                               }),
               data);
}

namespace {

inline constexpr double kIcaTolerance = 1e-4;
inline constexpr int kIcaMaxIterations = 200;

// (W W^T)^{-1/2} W
Matrix SymmetricDecorrelation(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(w * w.transpose());
  const Vector inv_sqrt =
      solver.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return solver.eigenvectors() * inv_sqrt.asDiagonal() *
         solver.eigenvectors().transpose() * w;
}

}  // namespace

StepPtr FitFastIca(const WorkflowStep& step, TrainingData& data, Rng& rng) {
  const std::string& id = step.algorithm;
  const Matrix& x = data.features;
  int k = ComponentCount(step, x.cols());
  const bool deflation = step.GetString("algorithm", "parallel") == "deflation";
  const Vector mean = ColumnMeans(x);
  const Matrix centered = x.rowwise() - mean.transpose();
  const auto n = static_cast<double>(x.rows());
  const Matrix covariance = centered.transpose() * centered / std::max(n, 1.0);
  const EigenPairs eig = TopEigenpairs(covariance, k, rng);

  // Whitening keeps only numerically non-zero directions.
  const double top = eig.values.size() > 0 ? eig.values[0] : 0.0;
  int rank = 0;
  while (rank < k && eig.values[rank] > 1e-10 * std::max(top, 1e-300)) ++rank;
  if (rank == 0) throw AlgorithmFailure(id, "whitening failed: zero variance");
  k = rank;
  Matrix whitening(x.cols(), k);  // columns: e_c / sqrt(lambda_c)
  for (int c = 0; c < k; ++c) {
    whitening.col(c) = eig.vectors.col(c) / std::sqrt(eig.values[c]);
  }
  const Matrix white = centered * whitening;  // n x k

  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w(k, k);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);

  const auto contrast = [&](const Vector& projected, Vector& g, double& mean_gp) {
    g = projected.array().tanh();
    mean_gp = (1.0 - g.array().square()).mean();
  };

  if (deflation) {
    for (int c = 0; c < k; ++c) {
      Vector wc = w.row(c).transpose();
      for (int j = 0; j < c; ++j) wc -= wc.dot(w.row(j).transpose()) * w.row(j).transpose();
      wc.normalize();
      bool converged = false;
      for (int it = 0; it < kIcaMaxIterations && !converged; ++it) {
        Vector g;
        double mean_gp = 0.0;
        contrast(white * wc, g, mean_gp);
        Vector next = white.transpose() * g / n - mean_gp * wc;
        for (int j = 0; j < c; ++j) {
          next -= next.dot(w.row(j).transpose()) * w.row(j).transpose();
        }
        const double norm = next.norm();
        if (!(norm > 0.0)) throw AlgorithmFailure(id, "degenerate unmixing vector");
        next /= norm;
        converged = std::abs(std::abs(next.dot(wc)) - 1.0) < kIcaTolerance;
        wc = next;
      }
      if (!converged) throw AlgorithmFailure(id, "fixed-point iteration did not converge");
      w.row(c) = wc.transpose();
    }
  } else {
    w = SymmetricDecorrelation(w);
    bool converged = false;
    for (int it = 0; it < kIcaMaxIterations && !converged; ++it) {
      const Matrix projected = white * w.transpose();  // n x k
      const Matrix g = projected.array().tanh();
      const Vector mean_gp = (1.0 - g.array().square()).colwise().mean().transpose();
      Matrix next = g.transpose() * white / n - mean_gp.asDiagonal() * w;
      next = SymmetricDecorrelation(next);
      const double lim =
          ((next * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
      w = next;
      converged = lim < kIcaTolerance;
    }
    if (!converged) throw AlgorithmFailure(id, "fixed-point iteration did not converge");
  }

  const Matrix unmixing = whitening * w.transpose();  // d x k
  const auto width = static_cast<std::size_t>(x.cols());
  return Apply(MakeTransformer(id, width,
                               [mean, unmixing](const Matrix& m) -> Matrix {
                                 return (m.rowwise() - mean.transpose()) * unmixing;
                               }),
               data);
}

StepPtr FitFeatureAgglomeration(const WorkflowStep& step, TrainingData& data) {
  const Matrix& x = data.features;
  const Eigen::Index d = x.cols();
  const auto target = static_cast<std::size_t>(
      std::clamp<std::int64_t>(step.GetInt("n_clusters", 2), 1, d));
  const std::string linkage = step.GetString("linkage", "ward");
  if (linkage != "ward" && linkage != "complete" && linkage != "average") {
    throw InvalidArgument("fagg: unknown linkage '" + linkage + "'");
  }

  // Features are the points being clustered.
  Matrix pairwise(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      pairwise(a, b) = (x.col(a) - x.col(b)).norm();

  std::vector<std::vector<Eigen::Index>> clusters(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) clusters[static_cast<std::size_t>(j)] = {j};

  const auto distance = [&](const std::vector<Eigen::Index>& a,
                            const std::vector<Eigen::Index>& b) {
    if (linkage == "ward") {
      Vector ca = Vector::Zero(x.rows());
      Vector cb = Vector::Zero(x.rows());
      for (auto j : a) ca += x.col(j);
      for (auto j : b) cb += x.col(j);
      ca /= static_cast<double>(a.size());
      cb /= static_cast<double>(b.size());
      const double na = static_cast<double>(a.size());
      const double nb = static_cast<double>(b.size());
      return std::sqrt(2.0 * na * nb / (na + nb)) * (ca - cb).norm();
    }
    double acc = linkage == "complete" ? 0.0 : 0.0;
    for (auto i : a) {
      for (auto j : b) {
        acc = linkage == "complete" ? std::max(acc, pairwise(i, j))
                                    : acc + pairwise(i, j);
      }
    }
    return linkage == "complete" ? acc
                                 : acc / static_cast<double>(a.size() * b.size());
  };

  while (clusters.size() > target) {
    std::size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const double dist = distance(clusters[a], clusters[b]);
        if (dist < best) {
          best = dist;
          best_a = a;
          best_b = b;
        }
      }
    }
    auto& merged = clusters[best_a];
    merged.insert(merged.end(), clusters[best_b].begin(), clusters[best_b].end());
    std::sort(merged.begin(), merged.end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  std::sort(clusters.begin(), clusters.end());

  Matrix pooling = Matrix::Zero(d, static_cast<Eigen::Index>(clusters.size()));
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (auto j : clusters[c]) {
      pooling(j, static_cast<Eigen::Index>(c)) = 1.0 / static_cast<double>(clusters[c].size());
    }
  }
  const auto width = static_cast<std::size_t>(d);
  return Apply(MakeTransformer(step.algorithm, width,
                               [pooling](const Matrix& m) -> Matrix { return m * pooling; }),
               data);
}

StepPtr FitRandomUnderSampler(const WorkflowStep& step, TrainingData& data,
                              Rng& rng) {
  const std::string strategy = step.GetString("sampling_strategy", "majority");
  auto groups = RowsByClass(data);
  auto step_ptr = std::make_shared<Sampler>(step.algorithm,
                                            static_cast<std::size_t>(data.features.cols()));
  if (groups.size() < 2) return step_ptr;
  std::size_t minority = 0, majority = 0;
  for (std::size_t g = 1; g < groups.size(); ++g) {
    if (groups[g].second.size() < groups[minority].second.size()) minority = g;
    if (groups[g].second.size() > groups[majority].second.size()) majority = g;
  }
  const std::size_t target = groups[minority].second.size();
  std::vector<std::size_t> keep;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto rows = groups[g].second;
    bool resample = false;
    if (strategy == "majority") {
      resample = g == majority;
    } else if (strategy == "not_minority") {
      resample = g != minority;
    } else if (strategy == "all") {
      resample = true;
    } else {
      throw InvalidArgument("rus: unknown sampling_strategy '" + strategy + "'");
    }
    if (resample && rows.size() > target) {
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(target);
    }
    keep.insert(keep.end(), rows.begin(), rows.end());
  }
  std::sort(keep.begin(), keep.end());
  Resample(data, keep);
  return step_ptr;
}

StepPtr FitRandomOverSampler(const WorkflowStep& step, TrainingData& data,
                             Rng& rng) {
  const std::string strategy = step.GetString("sampling_strategy", "minority");
  auto groups = RowsByClass(data);
  auto step_ptr = std::make_shared<Sampler>(step.algorithm,
                                            static_cast<std::size_t>(data.features.cols()));
  if (groups.size() < 2) return step_ptr;
  std::size_t minority = 0, majority = 0;
  for (std::size_t g = 1; g < groups.size(); ++g) {
    if (groups[g].second.size() < groups[minority].second.size()) minority = g;
    if (groups[g].second.size() > groups[majority].second.size()) majority = g;
  }
  const std::size_t target = groups[majority].second.size();
  std::vector<std::size_t> rows(data.labels.size());
  std::iota(rows.begin(), rows.end(), 0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    bool resample = false;
    if (strategy == "minority") {
      resample = g == minority;
    } else if (strategy == "not_majority") {
      resample = g != majority;
    } else if (strategy == "all") {
      resample = true;
    } else {
      throw InvalidArgument("ros: unknown sampling_strategy '" + strategy + "'");
    }
    const auto& members = groups[g].second;
    if (!resample || members.size() >= target) continue;
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (std::size_t extra = members.size(); extra < target; ++extra) {
      rows.push_back(members[pick(rng)]);
    }
  }
  Resample(data, rows);
  return step_ptr;
}

}  // namespace evoflow::ml::internal
