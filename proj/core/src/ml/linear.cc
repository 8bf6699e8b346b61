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
#include <span>

#include "ml/internal.h"

namespace evoflow::ml::internal {
namespace {

inline constexpr int kBatchSize = 32;
inline constexpr int kMaxEpochs = 200;
inline constexpr int kPatience = 5;
inline constexpr double kLossTolerance = 1e-4;
inline constexpr double kLearningRate = 0.01;

class Adam {
 public:
  explicit Adam(std::vector<Matrix*> params) : params_(std::move(params)) {
    for (Matrix* p : params_) {
      m_.push_back(Matrix::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }

  void Step(const std::vector<Matrix>& grads) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grads[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grads[i].cwiseAbs2();
      params_[i]->array() -= kLearningRate * (m_[i].array() / c1) /
                             ((v_[i].array() / c2).sqrt() + kEps);
    }
  }

 private:
  std::vector<Matrix*> params_;
  std::vector<Matrix> m_, v_;
  int t_ = 0;
};

// Runs shuffled mini-batch epochs until the mean epoch loss stalls. `batch`
// receives row indices and returns the batch loss sum after updating.
template <typename BatchFn>
void TrainEpochs(std::size_t rows, Rng& rng, const std::string& algorithm,
                 BatchFn&& batch) {
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < kMaxEpochs && stale < kPatience; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < rows; start += kBatchSize) {
      const std::size_t end = std::min(rows, start + kBatchSize);
      total += batch(std::span<const std::size_t>(order.data() + start, end - start));
    }
    const double loss = total / static_cast<double>(rows);
    if (!std::isfinite(loss)) throw AlgorithmFailure(algorithm, "training diverged");
    if (loss < best - kLossTolerance) {
      best = loss;
      stale = 0;
    } else {
      ++stale;
    }
  }
}

Matrix Gather(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

// Row-wise softmax in place; returns the summed cross-entropy of `labels`.
double SoftmaxCrossEntropy(Matrix& logits, const Labels& labels,
                           std::span<const std::size_t> rows) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    logits.row(i).array() = (logits.row(i).array() - top).exp();
    const double z = logits.row(i).sum();
    logits.row(i) /= z;
    const int y = labels[rows[static_cast<std::size_t>(i)]];
    loss -= std::log(std::max(logits(i, y), 1e-300));
  }
  return loss;
}

// Penalty gradient and value for a weight matrix.
double Penalty(const Matrix& w, bool l1, double strength, Matrix& grad) {
  if (l1) {
    grad = strength * w.array().sign().matrix();
    return strength * w.cwiseAbs().sum();
  }
  grad = strength * w;
  return 0.5 * strength * w.squaredNorm();
}

// Blocks scores of classes absent from training.
Matrix MaskAbsent(Matrix scores, const std::vector<int>& counts) {
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      scores.col(static_cast<Eigen::Index>(c))
          .setConstant(-std::numeric_limits<double>::infinity());
    }
  }
  return scores;
}

void RequireKnown(const std::string& value, std::initializer_list<const char*> known,
                  const std::string& algorithm, const std::string& name) {
  for (const char* k : known) {
    if (value == k) return;
  }
  throw InvalidArgument(algorithm + ": unknown " + name + " '" + value + "'");
}

StepPtr LinearClassifier(const WorkflowStep& step, const TrainingData& data,
                         Matrix w, Vector b) {
  const auto counts = ClassCounts(data.labels, data.num_classes);
  RequireFinite(w, step.algorithm);
  RequireFinite(b, step.algorithm);
  auto scores = [w = std::move(w), b = std::move(b), counts](const Matrix& x) {
    Matrix s = x * w;
    s.rowwise() += b.transpose();
    return MaskAbsent(std::move(s), counts);
  };
  return std::make_shared<ScoringClassifier>(
      step.algorithm, static_cast<std::size_t>(data.features.cols()), scores);
}

}  // namespace

StepPtr FitLogisticRegression(const WorkflowStep& step,
                              const TrainingData& data, Rng& rng) {
  const std::string penalty = step.GetString("penalty", "l2");
  RequireKnown(penalty, {"l1", "l2"}, step.algorithm, "penalty");
  const double c = step.GetReal("C", 1.0);
  const auto n = data.labels.size();
  const double strength = 1.0 / (c * static_cast<double>(n));
  Matrix w = Matrix::Zero(data.features.cols(), data.num_classes);
  Matrix b = Matrix::Zero(1, data.num_classes);
  Adam adam({&w, &b});
  Matrix penalty_grad;
  TrainEpochs(n, rng, step.algorithm, [&](std::span<const std::size_t> rows) {
    const Matrix x = Gather(data.features, rows);
    Matrix p = x * w;
    p.rowwise() += b.row(0);
    double loss = SoftmaxCrossEntropy(p, data.labels, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      p(static_cast<Eigen::Index>(i), data.labels[rows[i]]) -= 1.0;
    }
    const double m = static_cast<double>(rows.size());
    loss += m * Penalty(w, penalty == "l1", strength, penalty_grad);
    adam.Step({x.transpose() * p / m + penalty_grad, p.colwise().sum() / m});
    return loss;
  });
  return LinearClassifier(step, data, std::move(w), b.row(0).transpose());
}

StepPtr FitLinearSvc(const WorkflowStep& step, const TrainingData& data,
                     Rng& rng) {
  const std::string penalty = step.GetString("penalty", "l2");
  RequireKnown(penalty, {"l1", "l2"}, step.algorithm, "penalty");
  const double c = step.GetReal("C", 1.0);
  const auto n = data.labels.size();
  const double strength = 1.0 / (c * static_cast<double>(n));
  const int k = data.num_classes;
  Matrix w = Matrix::Zero(data.features.cols(), k);
  Matrix b = Matrix::Zero(1, k);
  Adam adam({&w, &b});
  Matrix penalty_grad;
  // One-vs-rest squared hinge.
  TrainEpochs(n, rng, step.algorithm, [&](std::span<const std::size_t> rows) {
    const Matrix x = Gather(data.features, rows);
    Matrix margin = x * w;
    margin.rowwise() += b.row(0);
    Matrix grad_out = Matrix::Zero(margin.rows(), k);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < margin.rows(); ++i) {
      const int y = data.labels[rows[static_cast<std::size_t>(i)]];
      for (int j = 0; j < k; ++j) {
        const double sign = j == y ? 1.0 : -1.0;
        const double slack = 1.0 - sign * margin(i, j);
        if (slack > 0.0) {
          loss += slack * slack;
          grad_out(i, j) = -2.0 * sign * slack;
        }
      }
    }
    const double m = static_cast<double>(rows.size());
    loss += m * Penalty(w, penalty == "l1", strength, penalty_grad);
    adam.Step({x.transpose() * grad_out / m + penalty_grad, grad_out.colwise().sum() / m});
    return loss;
  });
  return LinearClassifier(step, data, std::move(w), b.row(0).transpose());
}

StepPtr FitPassiveAggressive(const WorkflowStep& step,
                             const TrainingData& data, Rng& rng) {
  const std::string loss_name = step.GetString("loss", "hinge");
  RequireKnown(loss_name, {"hinge", "squared_hinge"}, step.algorithm, "loss");
  const bool pa2 = loss_name == "squared_hinge";
  const double c = step.GetReal("C", 1.0);
  const int k = data.num_classes;
  Matrix w = Matrix::Zero(data.features.cols(), k);
  Vector b = Vector::Zero(k);
  TrainEpochs(data.labels.size(), rng, step.algorithm,
              [&](std::span<const std::size_t> rows) {
                double total = 0.0;
                for (auto r : rows) {
                  const auto x = data.features.row(static_cast<Eigen::Index>(r));
                  const double norm2 = x.squaredNorm() + 1.0;  // bias input
                  for (int j = 0; j < k; ++j) {
                    const double sign = j == data.labels[r] ? 1.0 : -1.0;
                    const double loss = std::max(0.0, 1.0 - sign * (x.dot(w.col(j)) + b[j]));
                    if (loss <= 0.0) continue;
                    total += loss;
                    const double tau =
                        pa2 ? loss / (norm2 + 0.5 / c) : std::min(c, loss / norm2);
                    w.col(j) += tau * sign * x.transpose();
                    b[j] += tau * sign;
                  }
                }
                return total;
              });
  return LinearClassifier(step, data, std::move(w), std::move(b));
}

StepPtr FitMlp(const WorkflowStep& step, const TrainingData& data, Rng& rng) {
  const std::string activation = step.GetString("activation", "relu");
  RequireKnown(activation, {"relu", "tanh", "logistic"}, step.algorithm, "activation");
  const auto hidden = static_cast<Eigen::Index>(
      std::max<std::int64_t>(step.GetInt("hidden_units", 10), 1));
  const double alpha = step.GetReal("alpha", 1e-4);
  const Eigen::Index d = data.features.cols();
  const int k = data.num_classes;
  const auto n = data.labels.size();

  const auto glorot = [&](Eigen::Index fan_in, Eigen::Index fan_out) {
    const double factor = activation == "logistic" ? 2.0 : 6.0;
    const double bound = std::sqrt(factor / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix m(fan_in, fan_out);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  Matrix w1 = glorot(d, hidden);
  Matrix b1 = glorot(1, hidden);
  Matrix w2 = glorot(hidden, k);
  Matrix b2 = glorot(1, k);

  const auto activate = [activation](Matrix& z) {
    if (activation == "relu") {
      z = z.cwiseMax(0.0);
    } else if (activation == "tanh") {
      z = z.array().tanh();
    } else {
      z = (1.0 + (-z.array()).exp()).inverse();
    }
  };
  // Derivative expressed through the activation output.
  const auto derivative = [activation](const Matrix& a) -> Matrix {
    if (activation == "relu") return (a.array() > 0.0).cast<double>();
    if (activation == "tanh") return 1.0 - a.array().square();
    return a.array() * (1.0 - a.array());
  };

  Adam adam({&w1, &b1, &w2, &b2});
  const double strength = alpha / static_cast<double>(n);
  TrainEpochs(n, rng, step.algorithm, [&](std::span<const std::size_t> rows) {
    const Matrix x = Gather(data.features, rows);
    Matrix a = x * w1;
    a.rowwise() += b1.row(0);
    activate(a);
    Matrix p = a * w2;
    p.rowwise() += b2.row(0);
    double loss = SoftmaxCrossEntropy(p, data.labels, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      p(static_cast<Eigen::Index>(i), data.labels[rows[i]]) -= 1.0;
    }
    const double m = static_cast<double>(rows.size());
    loss += m * 0.5 * strength * (w1.squaredNorm() + w2.squaredNorm());
    const Matrix delta = (p * w2.transpose()).cwiseProduct(derivative(a));
    adam.Step({x.transpose() * delta / m + strength * w1, delta.colwise().sum() / m,
               a.transpose() * p / m + strength * w2, p.colwise().sum() / m});
    return loss;
  });

  RequireFinite(w1, step.algorithm);
  RequireFinite(w2, step.algorithm);
  const auto counts = ClassCounts(data.labels, k);
  auto scores = [=](const Matrix& x) -> Matrix {
    Matrix h = x * w1;
    h.rowwise() += b1.row(0);
    activate(h);
    Matrix s = h * w2;
    s.rowwise() += b2.row(0);
    return MaskAbsent(std::move(s), counts);
  };
  return std::make_shared<ScoringClassifier>(step.algorithm,
                                             static_cast<std::size_t>(d), scores);
}

}  // namespace evoflow::ml::internal
