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

// JSON mappings for the types exchanged through logs, result files and the
// HTTP service. Field names follow the C++ member names.

#ifndef EVOFLOW_JSON_H_
#define EVOFLOW_JSON_H_

#include <nlohmann/json.hpp>

#include "evoflow/engine.h"
#include "evoflow/evaluation_record.h"
#include "evoflow/grammar.h"
#include "evoflow/interaction.h"
#include "evoflow/search.h"
#include "evoflow/thresholds.h"

namespace evoflow {
using Json = nlohmann::json;
}  // namespace evoflow

namespace evoflow::grammar {
void to_json(Json& j, const HyperparamValueId& v);
void from_json(const Json& j, HyperparamValueId& v);
}  // namespace evoflow::grammar

namespace evoflow::search {
void to_json(Json& j, const WorkflowStep& s);
void from_json(const Json& j, WorkflowStep& s);
// from_json recomputes canonical_key from the steps.
void to_json(Json& j, const WorkflowSpec& w);
void from_json(const Json& j, WorkflowSpec& w);
}  // namespace evoflow::search

namespace evoflow::evaluation {
void to_json(Json& j, const EvaluationRecord& r);
void from_json(const Json& j, EvaluationRecord& r);
}  // namespace evoflow::evaluation

namespace evoflow::interaction {
// Disabled thresholds are null.
void to_json(Json& j, const Thresholds& t);
void from_json(const Json& j, Thresholds& t);
void to_json(Json& j, const SnapshotIndividual& s);
void from_json(const Json& j, SnapshotIndividual& s);
void to_json(Json& j, const SymbolStats& s);
void from_json(const Json& j, SymbolStats& s);
void to_json(Json& j, const RegionPartition& p);
void from_json(const Json& j, RegionPartition& p);
void to_json(Json& j, const Candidates& c);
void from_json(const Json& j, Candidates& c);
void to_json(Json& j, const Budget& b);
void from_json(const Json& j, Budget& b);
void to_json(Json& j, const DivergencePoint& p);
void from_json(const Json& j, DivergencePoint& p);
void to_json(Json& j, const InteractionSnapshot& s);
void from_json(const Json& j, InteractionSnapshot& s);
}  // namespace evoflow::interaction

namespace evoflow::engine {
// from_json applies only the fields present, so a partial object overrides
// defaults.
void to_json(Json& j, const EngineConfig& c);
void from_json(const Json& j, EngineConfig& c);
// {"kind": "Continue", "generations_until_next": n} or {"kind": "Stop"}.
void to_json(Json& j, const Decision& d);
void from_json(const Json& j, Decision& d);
void to_json(Json& j, const Feedback& f);
void from_json(const Json& j, Feedback& f);
void to_json(Json& j, const EvalLogEntry& e);
void to_json(Json& j, const InteractionRecord& r);
}  // namespace evoflow::engine

#endif  // EVOFLOW_JSON_H_
