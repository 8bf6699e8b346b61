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

// Fitness computation: stratified k-fold cross-validated balanced accuracy,
// timing through an injectable clock, and a per-workflow result cache.

#ifndef EVOFLOW_EVALUATION_H_
#define EVOFLOW_EVALUATION_H_

#include <cstdint>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evoflow/evaluation_record.h"
#include "evoflow/ml.h"
#include "evoflow/search.h"

namespace evoflow::evaluation {

inline constexpr int kDefaultFolds = 5;

// Mean recall over the classes present in `y_true`. Throws InvalidArgument on
// empty or mismatched input.
double BalancedAccuracy(std::span<const int> y_true, std::span<const int> y_pred);

struct FoldPlan {
  int k = 0;
  std::vector<int> fold;  // fold index per training row
  std::uint64_t seed = 0;

  std::vector<std::size_t> HeldOut(int f) const;
  std::vector<std::size_t> Training(int f) const;
  bool operator==(const FoldPlan&) const = default;
};

// Rows of each class are shuffled and dealt round-robin, continuing the fold
// rotation from where the previous class stopped. Per-class counts across
// folds then differ by at most one. Throws InvalidArgument if k < 2.
FoldPlan MakeFoldPlan(const ml::Labels& labels, int k, std::uint64_t seed);

// Source of time readings in seconds. Implementations are thread-safe.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double Now() = 0;
};

class SteadyClock : public Clock {
 public:
  double Now() override;
};

// Returns the given readings in order, then repeats the last one.
class ScriptedClock : public Clock {
 public:
  explicit ScriptedClock(std::vector<double> readings);
  double Now() override;

 private:
  std::mutex mu_;
  std::vector<double> readings_;
  std::size_t next_ = 0;
};

// Advances by a fixed step on every reading, starting at zero.
class StepClock : public Clock {
 public:
  explicit StepClock(double step) : step_(step) {}
  double Now() override;

 private:
  std::mutex mu_;
  double step_;
  double now_ = 0.0;
};

// canonical_key -> record. A key is computed at most once, even when several
// threads miss on it concurrently: the first computes, the rest wait.
class EvaluationCache {
 public:
  EvaluationCache() = default;
  // Copies completed entries and counters.
  EvaluationCache(const EvaluationCache& other);
  EvaluationCache& operator=(const EvaluationCache&) = delete;

  template <typename Compute>
  std::pair<EvaluationRecord, bool> GetOrCompute(const std::string& key,
                                                 Compute&& compute) {
    std::shared_future<EvaluationRecord> pending;
    std::promise<EvaluationRecord> promise;
    {
      std::lock_guard lock(mu_);
      auto it = entries_.find(key);
      if (it != entries_.end()) {
        ++hits_;
        pending = it->second;
      } else {
        ++misses_;
        entries_.emplace(key, promise.get_future().share());
      }
    }
    if (pending.valid()) return {pending.get(), true};
    try {
      EvaluationRecord record = compute();
      promise.set_value(record);
      return {std::move(record), false};
    } catch (...) {
      promise.set_exception(std::current_exception());
      throw;
    }
  }

  // Completed record for `key`, without touching the counters.
  std::optional<EvaluationRecord> Peek(const std::string& key) const;

  std::uint64_t hits() const;
  std::uint64_t misses() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_future<EvaluationRecord>> entries_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

// Cross-validates a workflow without consulting any cache. Pipeline fits draw
// from a stream seeded with DeriveSeed(seed, canonical_key). AlgorithmFailure
// in any fold yields a failed record timed up to the failure.
EvaluationRecord EvaluateUncached(const search::WorkflowSpec& workflow,
                                  const ml::Dataset& train, const FoldPlan& plan,
                                  Clock& clock, std::uint64_t seed);

struct Evaluation {
  EvaluationRecord record;
  bool cached = false;
};

// Cache-aware evaluation keyed by the workflow's canonical_key.
Evaluation Evaluate(const search::WorkflowSpec& workflow, const ml::Dataset& train,
                    const FoldPlan& plan, EvaluationCache& cache, Clock& clock,
                    std::uint64_t seed);

}  // namespace evoflow::evaluation

#endif  // EVOFLOW_EVALUATION_H_
