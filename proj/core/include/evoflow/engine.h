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

// The search session: initial population, generations, interaction pauses,
// grammar pruning with population repair, and the run log.

#ifndef EVOFLOW_ENGINE_H_
#define EVOFLOW_ENGINE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evoflow/evaluation.h"
#include "evoflow/grammar.h"
#include "evoflow/ml.h"
#include "evoflow/search.h"
#include "evoflow/thresholds.h"

namespace evoflow::engine {

using search::Individual;

struct EngineConfig {
  int population_size = 100;
  double crossover_prob = 0.8;
  double mutation_prob = 0.2;
  int max_derivations = search::kDefaultMaxDerivations;
  int max_generations = 50;
  int max_interactions = 10;
  int first_interaction_generation = 15;
  int cv_folds = evaluation::kDefaultFolds;
  std::uint64_t seed = 0;

  // Throws InvalidArgument naming the first violated constraint.
  void Check() const;
  bool operator==(const EngineConfig&) const = default;
};

enum class Status { kRunning, kAwaitingFeedback, kFinished };
std::string_view ToString(Status status);

struct Decision {
  enum class Kind { kContinue, kStop };
  Kind kind = Kind::kContinue;
  int generations = 1;  // kContinue only

  static Decision Continue(int generations) { return {Kind::kContinue, generations}; }
  static Decision Stop() { return {Kind::kStop, 0}; }
  bool operator==(const Decision&) const = default;
};

struct Feedback {
  std::vector<grammar::AlgorithmId> remove_algorithms;
  std::vector<grammar::HyperparamValueId> remove_hyperparameter_values;
  interaction::Thresholds thresholds_used;
  Decision decision;

  bool Empty() const {
    return remove_algorithms.empty() && remove_hyperparameter_values.empty();
  }
};

// One evaluation, cache hits included.
struct EvalLogEntry {
  int generation = 0;
  search::WorkflowSpec workflow;
  evaluation::EvaluationRecord record;
  bool cached = false;
};

struct InteractionRecord {
  int generation = 0;
  interaction::Thresholds thresholds;
  std::vector<grammar::AlgorithmId> removed_algorithms;
  std::vector<grammar::HyperparamValueId> removed_hyperparameter_values;
  Decision decision;
  double wall_time_spent_seconds = 0.0;
};

// Receives log records as they are produced.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void OnEvaluation(const EvalLogEntry& entry) = 0;
  virtual void OnInteraction(const InteractionRecord& record) = 0;
};

struct RunResult {
  Individual archive;
  std::vector<EvalLogEntry> eval_log;
  double cumulative_eval_time = 0.0;
  std::vector<double> timeline;
};

// Single-writer session state machine. Not thread-safe; one actor drives it.
class Session {
 public:
  // Builds and evaluates the initial population. Throws InvalidArgument for
  // an invalid config, grammar or dataset.
  static Session Start(const EngineConfig& config, grammar::Grammar grammar,
                       std::shared_ptr<const ml::Dataset> train,
                       std::shared_ptr<evaluation::Clock> clock = nullptr,
                       std::shared_ptr<RunObserver> observer = nullptr);

  // Breeds, evaluates and replaces one generation. Throws StateError unless
  // Running.
  void StepGeneration();
  // Steps until the session pauses or finishes.
  void RunUntilPause();

  // Applies every removal as one batch, repairs the population and resumes.
  // Throws GrammarViolationError (session untouched) for an illegal batch,
  // InvalidArgument for a bad decision, StateError unless AwaitingFeedback.
  void ApplyFeedback(const Feedback& feedback, double wall_time_spent_seconds = 0.0);

  // Disables further pauses and resumes a paused session, which then runs
  // exactly like one started without interactions. Throws StateError when
  // Finished.
  void EndInteractions();

  // Throws StateError unless Finished.
  RunResult Result() const;

  // Deep copy with its own cache and no observer; the clock is shared.
  Session Fork() const;
  void SetObserver(std::shared_ptr<RunObserver> observer) { observer_ = std::move(observer); }

  const EngineConfig& config() const { return config_; }
  const grammar::Grammar& grammar() const { return grammar_; }
  const std::vector<Individual>& population() const { return population_; }
  const Individual& archive() const { return archive_; }
  int generation() const { return generation_; }
  int interactions_used() const { return interactions_used_; }
  std::optional<int> next_interaction_generation() const { return next_interaction_; }
  Status status() const { return status_; }
  const std::vector<EvalLogEntry>& eval_log() const { return eval_log_; }
  double cumulative_eval_time() const { return cumulative_eval_time_; }
  // Entry g is the cumulative evaluation time after generation g; entry 0
  // covers the initial population.
  const std::vector<double>& timeline() const { return timeline_; }
  const std::vector<InteractionRecord>& interactions() const { return interactions_; }
  // eval_log index of the first evaluation since the previous interaction.
  std::size_t snapshot_begin() const { return snapshot_begin_; }
  // Algorithms in the grammar the session started with.
  std::size_t original_algorithm_count() const { return original_algorithm_count_; }
  const evaluation::EvaluationCache& cache() const { return *cache_; }
  const ml::Dataset& train() const { return *train_; }

 private:
  Session() = default;

  // Evaluates in order, logging each result under `log_generation`.
  void EvaluateAll(std::vector<Individual>& individuals, int log_generation);
  void UpdateStatus();

  EngineConfig config_;
  grammar::Grammar grammar_;
  std::shared_ptr<const ml::Dataset> train_;
  std::shared_ptr<evaluation::Clock> clock_;
  std::shared_ptr<RunObserver> observer_;
  std::unique_ptr<evaluation::EvaluationCache> cache_;
  evaluation::FoldPlan plan_;
  search::Rng rng_;
  std::vector<Individual> population_;
  Individual archive_;
  int generation_ = 0;
  int interactions_used_ = 0;
  std::optional<int> next_interaction_;
  Status status_ = Status::kRunning;
  std::vector<EvalLogEntry> eval_log_;
  double cumulative_eval_time_ = 0.0;
  std::vector<double> timeline_;
  std::vector<InteractionRecord> interactions_;
  std::size_t snapshot_begin_ = 0;
  std::size_t original_algorithm_count_ = 0;
};

// Writes one JSON object per line: evaluations and interactions.
class JsonlRunLog : public RunObserver {
 public:
  // Truncates the file. Throws InvalidArgument if it cannot be opened.
  explicit JsonlRunLog(const std::string& path);
  ~JsonlRunLog() override;
  void OnEvaluation(const EvalLogEntry& entry) override;
  void OnInteraction(const InteractionRecord& record) override;

 private:
  struct File;
  std::unique_ptr<File> file_;
};

}  // namespace evoflow::engine

#endif  // EVOFLOW_ENGINE_H_
