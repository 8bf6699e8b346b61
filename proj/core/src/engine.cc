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

#include "evoflow/engine.h"

#include <random>

#include "evoflow/errors.h"
#include "evoflow/util.h"

namespace evoflow::engine {

std::string_view ToString(Status status) {
  switch (status) {
    case Status::kRunning:
      return "Running";
    case Status::kAwaitingFeedback:
      return "AwaitingFeedback";
    case Status::kFinished:
      return "Finished";
  }
  return "Unknown";
}

void EngineConfig::Check() const {
  const auto fail = [](const std::string& what) { throw InvalidArgument("config: " + what); };
  if (population_size < 2) fail("population_size must be at least 2");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) fail("crossover_prob must be in [0, 1]");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) fail("mutation_prob must be in [0, 1]");
  if (max_derivations < 1) fail("max_derivations must be positive");
  if (max_generations < 1) fail("max_generations must be positive");
  if (max_interactions < 0) fail("max_interactions must be non-negative");
  if (first_interaction_generation < 1) fail("first_interaction_generation must be positive");
  if (max_interactions > 0 && first_interaction_generation > max_generations) {
    fail("first_interaction_generation must not exceed max_generations");
  }
  if (cv_folds < 2) fail("cv_folds must be at least 2");
}

Session Session::Start(const EngineConfig& config, grammar::Grammar grammar,
                       std::shared_ptr<const ml::Dataset> train,
                       std::shared_ptr<evaluation::Clock> clock,
                       std::shared_ptr<RunObserver> observer) {
  config.Check();
  if (const auto violations = grammar::Validate(grammar); !violations.empty()) {
    throw InvalidArgument("grammar: " + util::Join(violations, "; "));
  }
  if (!train) throw InvalidArgument("no training dataset");
  train->Check();

  Session s;
  s.config_ = config;
  s.grammar_ = std::move(grammar);
  s.train_ = std::move(train);
  s.clock_ = clock ? std::move(clock) : std::make_shared<evaluation::SteadyClock>();
  s.observer_ = std::move(observer);
  s.cache_ = std::make_unique<evaluation::EvaluationCache>();
  s.plan_ = evaluation::MakeFoldPlan(s.train_->labels, config.cv_folds,
                                     util::DeriveSeed(config.seed, "folds"));
  s.rng_.seed(config.seed);
  s.original_algorithm_count_ = s.grammar_.algorithms().size();
  if (config.max_interactions > 0) s.next_interaction_ = config.first_interaction_generation;

  s.population_.reserve(static_cast<std::size_t>(config.population_size));
  for (int i = 0; i < config.population_size; ++i) {
    s.population_.push_back(
        search::RandomIndividual(s.grammar_, config.max_derivations, s.rng_));
  }
  s.archive_ = s.population_.front();
  s.archive_.evaluation.reset();
  s.EvaluateAll(s.population_, 0);
  s.timeline_.push_back(s.cumulative_eval_time_);
  return s;
}

void Session::EvaluateAll(std::vector<Individual>& individuals, int log_generation) {
  for (auto& ind : individuals) {
    auto [record, cached] = evaluation::Evaluate(ind.workflow, *train_, plan_, *cache_,
                                                 *clock_, config_.seed);
    ind.evaluation = record;
    if (!cached) cumulative_eval_time_ += record.eval_time;
    if (!archive_.evaluation || evaluation::IsBetter(record, *archive_.evaluation)) {
      archive_ = ind;
    }
    eval_log_.push_back({log_generation, ind.workflow, std::move(record), cached});
    if (observer_) observer_->OnEvaluation(eval_log_.back());
  }
}

void Session::StepGeneration() {
  if (status_ != Status::kRunning) {
    throw StateError(std::string("step_generation needs a Running session, not ") +
                     std::string(ToString(status_)));
  }
  const auto size = static_cast<std::size_t>(config_.population_size);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Individual> offspring;
  offspring.reserve(size + 1);
  while (offspring.size() < size) {
    const Individual& p1 = population_[search::TournamentSelect(population_, rng_)];
    const Individual& p2 = population_[search::TournamentSelect(population_, rng_)];
    std::pair<Individual, Individual> children;
    if (coin(rng_) < config_.crossover_prob) {
      children = search::Crossover(p1, p2, grammar_, config_.max_derivations, rng_);
    } else {
      children = {p1, p2};
    }
    for (Individual* child : {&children.first, &children.second}) {
      if (coin(rng_) < config_.mutation_prob) {
        *child = search::Mutate(*child, grammar_, config_.max_derivations, rng_);
      }
      child->evaluation.reset();
    }
    offspring.push_back(std::move(children.first));
    if (offspring.size() < size) offspring.push_back(std::move(children.second));
  }
  EvaluateAll(offspring, generation_ + 1);
  population_ = search::Replace(population_, std::move(offspring));
  ++generation_;
  timeline_.push_back(cumulative_eval_time_);
  UpdateStatus();
}

void Session::UpdateStatus() {
  if (generation_ >= config_.max_generations) {
    status_ = Status::kFinished;
  } else if (next_interaction_ && generation_ == *next_interaction_ &&
             interactions_used_ < config_.max_interactions) {
    status_ = Status::kAwaitingFeedback;
  } else {
    status_ = Status::kRunning;
  }
}

void Session::RunUntilPause() {
  while (status_ == Status::kRunning) StepGeneration();
}

void Session::ApplyFeedback(const Feedback& feedback, double wall_time_spent_seconds) {
  if (status_ != Status::kAwaitingFeedback) {
    throw StateError(std::string("apply_feedback needs an AwaitingFeedback session, not ") +
                     std::string(ToString(status_)));
  }
  if (feedback.decision.kind == Decision::Kind::kContinue &&
      feedback.decision.generations < 1) {
    throw InvalidArgument("Continue needs at least one generation");
  }
  feedback.thresholds_used.Check();

  // Whole batch against a copy; the session changes only if all succeed.
  grammar::Grammar pruned = grammar_;
  std::vector<std::string> violations;
  for (const auto& a : feedback.remove_algorithms) {
    try {
      pruned = grammar::RemoveAlgorithm(pruned, a);
    } catch (const GrammarViolationError& e) {
      violations.push_back(e.what());
    }
  }
  for (const auto& v : feedback.remove_hyperparameter_values) {
    try {
      pruned = grammar::RemoveHyperparameterValue(pruned, v);
    } catch (const GrammarViolationError& e) {
      violations.push_back(e.what());
    }
  }
  if (!violations.empty()) {
    throw GrammarViolationError("feedback rejected: " + util::Join(violations, "; "),
                                violations);
  }

  if (!feedback.Empty()) {
    grammar_ = std::move(pruned);
    std::vector<std::size_t> invalid;
    for (std::size_t i = 0; i < population_.size(); ++i) {
      if (!search::IsValid(population_[i].tree, grammar_, config_.max_derivations)) {
        invalid.push_back(i);
      }
    }
    std::vector<Individual> fresh;
    fresh.reserve(invalid.size());
    for (std::size_t i = 0; i < invalid.size(); ++i) {
      fresh.push_back(search::RandomIndividual(grammar_, config_.max_derivations, rng_));
    }
    // Charged to the next generation's window.
    EvaluateAll(fresh, generation_ + 1);
    for (std::size_t i = 0; i < invalid.size(); ++i) {
      population_[invalid[i]] = std::move(fresh[i]);
    }
  }

  ++interactions_used_;
  InteractionRecord record{generation_,
                           feedback.thresholds_used,
                           feedback.remove_algorithms,
                           feedback.remove_hyperparameter_values,
                           feedback.decision,
                           wall_time_spent_seconds};
  interactions_.push_back(record);
  if (observer_) observer_->OnInteraction(record);
  snapshot_begin_ = eval_log_.size();

  if (feedback.decision.kind == Decision::Kind::kStop) {
    status_ = Status::kFinished;
    next_interaction_.reset();
    return;
  }
  if (interactions_used_ < config_.max_interactions) {
    next_interaction_ =
        std::min(generation_ + feedback.decision.generations, config_.max_generations);
  } else {
    next_interaction_.reset();
  }
  UpdateStatus();
}

void Session::EndInteractions() {
  if (status_ == Status::kFinished) throw StateError("session already finished");
  config_.max_interactions = interactions_used_;
  next_interaction_.reset();
  UpdateStatus();
}

RunResult Session::Result() const {
  if (status_ != Status::kFinished) {
    throw StateError(std::string("result needs a Finished session, not ") +
                     std::string(ToString(status_)));
  }
  return {archive_, eval_log_, cumulative_eval_time_, timeline_};
}

Session Session::Fork() const {
  Session s;
  s.config_ = config_;
  s.grammar_ = grammar_;
  s.train_ = train_;
  s.clock_ = clock_;
  s.cache_ = std::make_unique<evaluation::EvaluationCache>(*cache_);
  s.plan_ = plan_;
  s.rng_ = rng_;
  s.population_ = population_;
  s.archive_ = archive_;
  s.generation_ = generation_;
  s.interactions_used_ = interactions_used_;
  s.next_interaction_ = next_interaction_;
  s.status_ = status_;
  s.eval_log_ = eval_log_;
  s.cumulative_eval_time_ = cumulative_eval_time_;
  s.timeline_ = timeline_;
  s.interactions_ = interactions_;
  s.snapshot_begin_ = snapshot_begin_;
  s.original_algorithm_count_ = original_algorithm_count_;
  return s;
}

}  // namespace evoflow::engine
