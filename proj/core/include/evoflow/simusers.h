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

// Simulated users: threshold policies that inspect a snapshot and emit
// feedback without a human.

#ifndef EVOFLOW_SIMUSERS_H_
#define EVOFLOW_SIMUSERS_H_

#include <memory>
#include <string>
#include <vector>

#include "evoflow/engine.h"
#include "evoflow/interaction.h"

namespace evoflow::simusers {

enum class Strategy { kMostFrequentOne, kUpToOneThird };

struct Profile {
  double fitness_constant = 0.0;  // x in {0, 0.8, 0.9}
  double time_constant = 0.0;     // y in {0, 0.5, 1}
  Strategy strategy = Strategy::kMostFrequentOne;

  // "f0.9_t0.5_a12"; a zero axis is omitted. a1 = MostFrequentOne,
  // a12 = UpToOneThird.
  std::string id() const;
  // Accepts the rendered form, optional angle brackets, and aOne / aThird.
  // Throws InvalidArgument.
  static Profile Parse(std::string_view text);
  bool operator==(const Profile&) const = default;
};

// The 8 legal (x, y) pairs times the 2 strategies.
std::vector<Profile> ProfileSuite();

// Throws InvalidArgument on an empty snapshot.
interaction::Thresholds ComputeThresholds(const Profile& p,
                                          const interaction::InteractionSnapshot& snapshot);

// Pause schedule: interaction generations in increasing order.
struct Schedule {
  std::vector<int> interactions;
  int max_generations = 0;

  // Gap from `generation` to the next scheduled pause, or to the end.
  int GapAfter(int generation) const;
};

// 15:15:20 proportions over `max_generations` (9/18 for 30, 15/30 for 50).
Schedule ScaledSchedule(int max_generations);

// Deterministic feedback for one pause. Removals are legal as a batch by
// construction; the decision is Continue until the schedule's end.
engine::Feedback Decide(const Profile& p, const interaction::InteractionSnapshot& snapshot,
                        const grammar::Grammar& g, std::size_t original_algorithm_count,
                        const Schedule& schedule);

// Drives a session that is Running or AwaitingFeedback to the end, applying
// Decide at every pause.
void RunToEnd(const Profile& p, engine::Session& session, const Schedule& schedule);

struct SimulatedRun {
  engine::RunResult result;
  std::vector<engine::InteractionRecord> interactions;
};

// Starts a session with interactions at the schedule's pauses and runs it.
SimulatedRun RunSimulated(const Profile& p, engine::EngineConfig config,
                          const grammar::Grammar& g,
                          std::shared_ptr<const ml::Dataset> train,
                          std::shared_ptr<evaluation::Clock> clock = nullptr);

// Cumulative evaluation time spent after generation `first_interaction`.
double WindowTime(const std::vector<double>& timeline, int first_interaction);

// baseline window / interactive window. Throws InvalidArgument on a
// non-positive interactive window or a timeline too short for the window.
double Speedup(const std::vector<double>& baseline, const std::vector<double>& interactive,
               int first_interaction);

}  // namespace evoflow::simusers

#endif  // EVOFLOW_SIMUSERS_H_
