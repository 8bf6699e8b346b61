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

#ifndef EVOFLOW_THRESHOLDS_H_
#define EVOFLOW_THRESHOLDS_H_

#include <optional>

namespace evoflow::interaction {

// User thresholds; an empty optional disables that axis.
struct Thresholds {
  std::optional<double> t_acc;   // minimum fitness, in [0, 1]
  std::optional<double> t_time;  // maximum evaluation time, seconds >= 0

  // Throws InvalidArgument when an enabled threshold is out of range.
  void Check() const;
  bool operator==(const Thresholds&) const = default;
};

}  // namespace evoflow::interaction

#endif  // EVOFLOW_THRESHOLDS_H_
