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

#include "evoflow/simusers.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <vector>

#include "evoflow/errors.h"
#include "evoflow/util.h"

namespace evoflow::simusers {
namespace {

constexpr double kFitnessConstants[] = {0.0, 0.8, 0.9};
constexpr double kTimeConstants[] = {0.0, 0.5, 1.0};

bool IsAllowed(double value, std::span<const double> allowed) {
  return std::find(allowed.begin(), allowed.end(), value) != allowed.end();
}

double ParseConstant(std::string_view text, std::string_view whole) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument("malformed profile id '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

std::string Profile::id() const {
  std::vector<std::string> parts;
  if (fitness_constant != 0.0) parts.push_back("f" + util::FormatDouble(fitness_constant));
  if (time_constant != 0.0) parts.push_back("t" + util::FormatDouble(time_constant));
  parts.push_back(strategy == Strategy::kMostFrequentOne ? "a1" : "a12");
  return util::Join(parts, "_");
}

Profile Profile::Parse(std::string_view text) {
  std::string_view body = util::Trim(text);
  if (body.size() >= 2 && body.front() == '<' && body.back() == '>') {
    body = body.substr(1, body.size() - 2);
  }
  Profile p;
  bool has_strategy = false;
  for (const auto& part : util::Split(body, '_')) {
    if (part.empty()) throw InvalidArgument("malformed profile id '" + std::string(text) + "'");
    if (part == "a1" || part == "aOne") {
      p.strategy = Strategy::kMostFrequentOne;
      has_strategy = true;
    } else if (part == "a12" || part == "aThird") {
      p.strategy = Strategy::kUpToOneThird;
      has_strategy = true;
    } else if (part[0] == 'f') {
      p.fitness_constant = ParseConstant(std::string_view(part).substr(1), text);
    } else if (part[0] == 't') {
      p.time_constant = ParseConstant(std::string_view(part).substr(1), text);
    } else {
      throw InvalidArgument("malformed profile id '" + std::string(text) + "'");
    }
  }
  if (!has_strategy) {
    throw InvalidArgument("profile id '" + std::string(text) + "' lacks a strategy");
  }
  if (!IsAllowed(p.fitness_constant, kFitnessConstants) ||
      !IsAllowed(p.time_constant, kTimeConstants)) {
    throw InvalidArgument("profile id '" + std::string(text) + "' uses unknown constants");
  }
  if (p.fitness_constant == 0.0 && p.time_constant == 0.0) {
    throw InvalidArgument("profile id '" + std::string(text) + "' disables both thresholds");
  }
  return p;
}

std::vector<Profile> ProfileSuite() {
  std::vector<Profile> out;
  for (auto strategy : {Strategy::kMostFrequentOne, Strategy::kUpToOneThird}) {
    for (double x : kFitnessConstants) {
      for (double y : kTimeConstants) {
        if (x == 0.0 && y == 0.0) continue;
        out.push_back({x, y, strategy});
      }
    }
  }
  return out;
}

interaction::Thresholds ComputeThresholds(const Profile& p,
                                          const interaction::InteractionSnapshot& snapshot) {
  if (snapshot.individuals.empty()) {
    throw InvalidArgument("cannot compute thresholds from an empty snapshot");
  }
  std::vector<double> fitness, times;
  for (const auto& ind : snapshot.individuals) {
    fitness.push_back(ind.record.fitness);
    times.push_back(ind.record.eval_time);
  }
  interaction::Thresholds th;
  if (p.fitness_constant > 0.0) th.t_acc = p.fitness_constant * util::Mean(fitness);
  if (p.time_constant > 0.0) th.t_time = p.time_constant * util::Median(times);
  return th;
}

int Schedule::GapAfter(int generation) const {
  for (int g : interactions) {
    if (g > generation) return g - generation;
  }
  return std::max(1, max_generations - generation);
}

Schedule ScaledSchedule(int max_generations) {
  if (max_generations < 3) throw InvalidArgument("schedule needs at least 3 generations");
  const auto at = [&](int numerator) {
    return std::max(1, static_cast<int>(std::lround(max_generations * numerator / 50.0)));
  };
  Schedule s{{at(15), at(30)}, max_generations};
  if (s.interactions[1] <= s.interactions[0]) s.interactions[1] = s.interactions[0] + 1;
  return s;
}

engine::Feedback Decide(const Profile& p, const interaction::InteractionSnapshot& snapshot,
                        const grammar::Grammar& g, std::size_t original_algorithm_count,
                        const Schedule& schedule) {
  engine::Feedback feedback;
  feedback.decision = engine::Decision::Continue(schedule.GapAfter(snapshot.generation));
  if (snapshot.individuals.empty()) return feedback;

  feedback.thresholds_used = ComputeThresholds(p, snapshot);
  const auto partition = interaction::Partition(snapshot, feedback.thresholds_used);
  const auto candidates = interaction::RemovalCandidates(snapshot, partition, g);

  std::map<grammar::AlgorithmId, int> worst_counts;
  for (std::size_t i : partition.r_worst) {
    for (const auto& a : interaction::SymbolsOf(snapshot.individuals[i].workflow).algorithms) {
      ++worst_counts[a];
    }
  }
  std::vector<grammar::AlgorithmId> ranked(candidates.algorithms.begin(),
                                           candidates.algorithms.end());
  std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    return worst_counts[a] > worst_counts[b];
  });
  const std::size_t quota = p.strategy == Strategy::kMostFrequentOne
                                ? 1
                                : (original_algorithm_count + 2) / 3;

  grammar::Grammar working = g;
  for (const auto& a : ranked) {
    if (feedback.remove_algorithms.size() >= quota) break;
    try {
      working = grammar::RemoveAlgorithm(working, a);
      feedback.remove_algorithms.push_back(a);
    } catch (const GrammarViolationError&) {
    }
  }
  for (const auto& v : candidates.hyperparameter_values) {
    try {
      working = grammar::RemoveHyperparameterValue(working, v);
      feedback.remove_hyperparameter_values.push_back(v);
    } catch (const GrammarViolationError&) {
    }
  }
  return feedback;
}

void RunToEnd(const Profile& p, engine::Session& session, const Schedule& schedule) {
  while (session.status() != engine::Status::kFinished) {
    session.RunUntilPause();
    if (session.status() != engine::Status::kAwaitingFeedback) continue;
    const auto snapshot = interaction::BuildSnapshot(session);
    session.ApplyFeedback(Decide(p, snapshot, session.grammar(),
                                 session.original_algorithm_count(), schedule));
  }
}

SimulatedRun RunSimulated(const Profile& p, engine::EngineConfig config,
                          const grammar::Grammar& g,
                          std::shared_ptr<const ml::Dataset> train,
                          std::shared_ptr<evaluation::Clock> clock) {
  const Schedule schedule = ScaledSchedule(config.max_generations);
  config.first_interaction_generation = schedule.interactions.front();
  config.max_interactions = static_cast<int>(schedule.interactions.size());
  auto session = engine::Session::Start(config, g, std::move(train), std::move(clock));
  RunToEnd(p, session, schedule);
  return {session.Result(), session.interactions()};
}

double WindowTime(const std::vector<double>& timeline, int first_interaction) {
  if (first_interaction < 0 || static_cast<std::size_t>(first_interaction) >= timeline.size()) {
    throw InvalidArgument("timeline does not reach the window start");
  }
  return timeline.back() - timeline[static_cast<std::size_t>(first_interaction)];
}

double Speedup(const std::vector<double>& baseline, const std::vector<double>& interactive,
               int first_interaction) {
  const double base = WindowTime(baseline, first_interaction);
  const double inter = WindowTime(interactive, first_interaction);
  if (!(inter > 0.0)) throw InvalidArgument("interactive window time must be positive");
  return base / inter;
}

}  // namespace evoflow::simusers
