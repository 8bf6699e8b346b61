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

#include <algorithm>
#include <chrono>
#include <numeric>

#include "evoflow/errors.h"
#include "evoflow/util.h"

namespace evoflow::evaluation {

double BalancedAccuracy(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw InvalidArgument("balanced accuracy: label vectors differ in length");
  }
  if (y_true.empty()) throw InvalidArgument("balanced accuracy: empty input");
  std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // hits, support
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    auto& [hits, support] = per_class[y_true[i]];
    ++support;
    if (y_pred[i] == y_true[i]) ++hits;
  }
  double total = 0.0;
  for (const auto& [label, counts] : per_class) {
    total += static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return total / static_cast<double>(per_class.size());
}

std::vector<std::size_t> FoldPlan::HeldOut(int f) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::Training(int f) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != f) rows.push_back(i);
  }
  return rows;
}

FoldPlan MakeFoldPlan(const ml::Labels& labels, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("fold plan needs k >= 2");
  FoldPlan plan{k, std::vector<int>(labels.size(), -1), seed};
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  search::Rng rng(seed);
  int offset = 0;
  for (auto& [label, rows] : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      plan.fold[rows[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(k));
    }
    offset = static_cast<int>((offset + rows.size()) % static_cast<std::size_t>(k));
  }
  return plan;
}

double SteadyClock::Now() {
  using std::chrono::duration;
  return duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

ScriptedClock::ScriptedClock(std::vector<double> readings)
    : readings_(std::move(readings)) {
  if (readings_.empty()) throw InvalidArgument("scripted clock needs readings");
}

double ScriptedClock::Now() {
  std::lock_guard lock(mu_);
  const double value = readings_[std::min(next_, readings_.size() - 1)];
  ++next_;
  return value;
}

double StepClock::Now() {
  std::lock_guard lock(mu_);
  const double value = now_;
  now_ += step_;
  return value;
}

EvaluationCache::EvaluationCache(const EvaluationCache& other) {
  std::lock_guard lock(other.mu_);
  for (const auto& [key, future] : other.entries_) {
    if (future.wait_for(std::chrono::seconds(0)) == std::future_status::ready) {
      entries_.emplace(key, future);
    }
  }
  hits_ = other.hits_;
  misses_ = other.misses_;
}

std::optional<EvaluationRecord> EvaluationCache::Peek(const std::string& key) const {
  std::shared_future<EvaluationRecord> future;
  {
    std::lock_guard lock(mu_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    future = it->second;
  }
  if (future.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
    return std::nullopt;
  }
  return future.get();
}

std::uint64_t EvaluationCache::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::uint64_t EvaluationCache::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

std::size_t EvaluationCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

EvaluationRecord EvaluateUncached(const search::WorkflowSpec& workflow,
                                  const ml::Dataset& train, const FoldPlan& plan,
                                  Clock& clock, std::uint64_t seed) {
  if (plan.fold.size() != train.rows()) {
    throw InvalidArgument("fold plan does not match the training data");
  }
  EvaluationRecord record;
  record.classifier = workflow.classifier();
  search::Rng rng(util::DeriveSeed(seed, workflow.canonical_key));
  const double start = clock.Now();
  try {
    std::vector<int> predicted(train.rows(), -1);
    for (int f = 0; f < plan.k; ++f) {
      const auto held_out = plan.HeldOut(f);
      if (held_out.empty()) continue;
      const ml::Dataset fit_rows = train.Subset(plan.Training(f));
      const ml::Dataset test_rows = train.Subset(held_out);
      const auto pipeline = ml::FitPipeline(workflow, fit_rows, rng);
      const auto labels = ml::PredictPipeline(pipeline, test_rows.features);
      for (std::size_t i = 0; i < held_out.size(); ++i) predicted[held_out[i]] = labels[i];
    }
    record.fitness = BalancedAccuracy(train.labels, predicted);
  } catch (const AlgorithmFailure& e) {
    record.failed = true;
    record.fitness = 0.0;
    record.failure = e.what();
  }
  record.eval_time = std::max(0.0, clock.Now() - start);
  return record;
}

Evaluation Evaluate(const search::WorkflowSpec& workflow, const ml::Dataset& train,
                    const FoldPlan& plan, EvaluationCache& cache, Clock& clock,
                    std::uint64_t seed) {
  auto [record, cached] = cache.GetOrCompute(workflow.canonical_key, [&] {
    return EvaluateUncached(workflow, train, plan, clock, seed);
  });
  return {std::move(record), cached};
}

}  // namespace evoflow::evaluation
