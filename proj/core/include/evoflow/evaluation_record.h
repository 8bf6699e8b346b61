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

#ifndef EVOFLOW_EVALUATION_RECORD_H_
#define EVOFLOW_EVALUATION_RECORD_H_

#include <compare>
#include <string>

namespace evoflow::evaluation {

// Outcome of evaluating one workflow. failed implies fitness == 0.
struct EvaluationRecord {
  double fitness = 0.0;    // pooled out-of-fold balanced accuracy
  double eval_time = 0.0;  // seconds spent on the full k-fold procedure
  bool failed = false;
  std::string classifier;
  std::string failure;  // AlgorithmFailure message when failed

  bool operator==(const EvaluationRecord&) const = default;
};

// Quality order: higher fitness first, then lower evaluation time.
// `less` means `a` is better than `b`.
inline std::partial_ordering CompareQuality(const EvaluationRecord& a,
                                            const EvaluationRecord& b) {
  if (a.fitness != b.fitness) return b.fitness <=> a.fitness;
  return a.eval_time <=> b.eval_time;
}

inline bool IsBetter(const EvaluationRecord& a, const EvaluationRecord& b) {
  return CompareQuality(a, b) == std::partial_ordering::less;
}

}  // namespace evoflow::evaluation

#endif  // EVOFLOW_EVALUATION_RECORD_H_
