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

#include "evoflow/json.h"

#include <fstream>

#include <set>

#include "evoflow/errors.h"

namespace evoflow {
namespace {

template <typename T>
void ReadOptional(const Json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) it->get_to(out);
}

Json OptionalNumber(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> ReadOptionalNumber(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

namespace grammar {

void to_json(Json& j, const HyperparamValueId& v) { j = v.ToString(); }

void from_json(const Json& j, HyperparamValueId& v) {
  v = HyperparamValueId::Parse(j.get<std::string>());
}

}  // namespace grammar

namespace search {

void to_json(Json& j, const WorkflowStep& s) {
  Json params = Json::object();
  for (const auto& [name, value] : s.hyperparams) {
    std::visit([&](const auto& v) { params[name] = v; }, value);
  }
  j = {{"algorithm", s.algorithm}, {"hyperparams", params}};
}

void from_json(const Json& j, WorkflowStep& s) {
  s.algorithm = j.at("algorithm").get<std::string>();
  s.hyperparams.clear();
  for (const auto& [name, value] : j.at("hyperparams").items()) {
    if (value.is_number_integer()) {
      s.hyperparams[name] = value.get<std::int64_t>();
    } else if (value.is_number()) {
      s.hyperparams[name] = value.get<double>();
    } else {
      s.hyperparams[name] = value.get<std::string>();
    }
  }
}

void to_json(Json& j, const WorkflowSpec& w) {
  j = {{"steps", w.steps}, {"canonical_key", w.canonical_key}};
}

void from_json(const Json& j, WorkflowSpec& w) {
  w = MakeWorkflow(j.at("steps").get<std::vector<WorkflowStep>>());
}

}  // namespace search

namespace evaluation {

void to_json(Json& j, const EvaluationRecord& r) {
  j = {{"fitness", r.fitness},
       {"eval_time", r.eval_time},
       {"failed", r.failed},
       {"classifier", r.classifier}};
  if (!r.failure.empty()) j["failure"] = r.failure;
}

void from_json(const Json& j, EvaluationRecord& r) {
  r.fitness = j.at("fitness").get<double>();
  r.eval_time = j.at("eval_time").get<double>();
  r.failed = j.at("failed").get<bool>();
  r.classifier = j.at("classifier").get<std::string>();
  r.failure = j.value("failure", std::string());
}

}  // namespace evaluation

namespace interaction {

void to_json(Json& j, const Thresholds& t) {
  j = {{"t_acc", OptionalNumber(t.t_acc)}, {"t_time", OptionalNumber(t.t_time)}};
}

void from_json(const Json& j, Thresholds& t) {
  t.t_acc = ReadOptionalNumber(j, "t_acc");
  t.t_time = ReadOptionalNumber(j, "t_time");
}

void to_json(Json& j, const SnapshotIndividual& s) {
  j = {{"workflow", s.workflow}, {"record", s.record}, {"generation", s.generation}};
}

void from_json(const Json& j, SnapshotIndividual& s) {
  j.at("workflow").get_to(s.workflow);
  j.at("record").get_to(s.record);
  j.at("generation").get_to(s.generation);
}

void to_json(Json& j, const SymbolStats& s) {
  j = {{"symbol", s.symbol},
       {"kind", ToString(s.kind)},
       {"occurrences", s.occurrences},
       {"max_eval_time", s.max_eval_time},
       {"mean_eval_time", s.mean_eval_time},
       {"max_fitness", s.max_fitness}};
}

void from_json(const Json& j, SymbolStats& s) {
  j.at("symbol").get_to(s.symbol);
  s.kind = ParseSymbolKind(j.at("kind").get<std::string>());
  j.at("occurrences").get_to(s.occurrences);
  j.at("max_eval_time").get_to(s.max_eval_time);
  j.at("mean_eval_time").get_to(s.mean_eval_time);
  j.at("max_fitness").get_to(s.max_fitness);
}

void to_json(Json& j, const RegionPartition& p) {
  j = {{"r_best", p.r_best}, {"r_worst", p.r_worst}};
}

void from_json(const Json& j, RegionPartition& p) {
  j.at("r_best").get_to(p.r_best);
  j.at("r_worst").get_to(p.r_worst);
}

void to_json(Json& j, const Candidates& c) {
  j = {{"algorithms", c.algorithms}, {"hyperparameter_values", c.hyperparameter_values}};
}

void from_json(const Json& j, Candidates& c) {
  j.at("algorithms").get_to(c.algorithms);
  j.at("hyperparameter_values").get_to(c.hyperparameter_values);
}

void to_json(Json& j, const Budget& b) {
  j = {{"interactions_left", b.interactions_left},
       {"generations_left", b.generations_left}};
}

void from_json(const Json& j, Budget& b) {
  j.at("interactions_left").get_to(b.interactions_left);
  j.at("generations_left").get_to(b.generations_left);
}

void to_json(Json& j, const DivergencePoint& p) {
  j = {{"generation", p.generation},
       {"cumulative_eval_time", p.cumulative_eval_time},
       {"baseline_cumulative_eval_time", OptionalNumber(p.baseline_cumulative_eval_time)}};
}

void from_json(const Json& j, DivergencePoint& p) {
  j.at("generation").get_to(p.generation);
  j.at("cumulative_eval_time").get_to(p.cumulative_eval_time);
  p.baseline_cumulative_eval_time = ReadOptionalNumber(j, "baseline_cumulative_eval_time");
}

void to_json(Json& j, const InteractionSnapshot& s) {
  j = {{"generation", s.generation},
       {"individuals", s.individuals},
       {"best_current", s.best_current},
       {"best_global", s.best_global},
       {"stats", s.stats},
       {"thresholds", s.thresholds ? Json(*s.thresholds) : Json(nullptr)},
       {"partition", s.partition ? Json(*s.partition) : Json(nullptr)},
       {"candidates", s.candidates ? Json(*s.candidates) : Json(nullptr)},
       {"budget", s.budget},
       {"time_divergence", s.time_divergence}};
}

void from_json(const Json& j, InteractionSnapshot& s) {
  j.at("generation").get_to(s.generation);
  j.at("individuals").get_to(s.individuals);
  j.at("best_current").get_to(s.best_current);
  j.at("best_global").get_to(s.best_global);
  j.at("stats").get_to(s.stats);
  const auto optional = [&](const char* key, auto& out) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      out.reset();
    } else {
      out = it->get<typename std::decay_t<decltype(out)>::value_type>();
    }
  };
  optional("thresholds", s.thresholds);
  optional("partition", s.partition);
  optional("candidates", s.candidates);
  j.at("budget").get_to(s.budget);
  j.at("time_divergence").get_to(s.time_divergence);
}

}  // namespace interaction

namespace engine {

void to_json(Json& j, const EngineConfig& c) {
  j = {{"population_size", c.population_size},
       {"crossover_prob", c.crossover_prob},
       {"mutation_prob", c.mutation_prob},
       {"max_derivations", c.max_derivations},
       {"max_generations", c.max_generations},
       {"max_interactions", c.max_interactions},
       {"first_interaction_generation", c.first_interaction_generation},
       {"cv_folds", c.cv_folds},
       {"seed", c.seed}};
}

void from_json(const Json& j, EngineConfig& c) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  static const std::set<std::string> kKnown = {
      "population_size", "crossover_prob",   "mutation_prob",
      "max_derivations", "max_generations",  "max_interactions",
      "first_interaction_generation", "cv_folds", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.contains(key)) throw InvalidArgument("unknown config field '" + key + "'");
  }
  ReadOptional(j, "population_size", c.population_size);
  ReadOptional(j, "crossover_prob", c.crossover_prob);
  ReadOptional(j, "mutation_prob", c.mutation_prob);
  ReadOptional(j, "max_derivations", c.max_derivations);
  ReadOptional(j, "max_generations", c.max_generations);
  ReadOptional(j, "max_interactions", c.max_interactions);
  ReadOptional(j, "first_interaction_generation", c.first_interaction_generation);
  ReadOptional(j, "cv_folds", c.cv_folds);
  ReadOptional(j, "seed", c.seed);
}

void to_json(Json& j, const Decision& d) {
  if (d.kind == Decision::Kind::kStop) {
    j = {{"kind", "Stop"}};
  } else {
    j = {{"kind", "Continue"}, {"generations_until_next", d.generations}};
  }
}

void from_json(const Json& j, Decision& d) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "Stop") {
    d = Decision::Stop();
  } else if (kind == "Continue") {
    d = Decision::Continue(j.at("generations_until_next").get<int>());
  } else {
    throw InvalidArgument("unknown decision kind '" + kind + "'");
  }
}

void to_json(Json& j, const Feedback& f) {
  j = {{"remove_algorithms", f.remove_algorithms},
       {"remove_hyperparameter_values", f.remove_hyperparameter_values},
       {"thresholds_used", f.thresholds_used},
       {"decision", f.decision}};
}

void from_json(const Json& j, Feedback& f) {
  f = Feedback{};
  ReadOptional(j, "remove_algorithms", f.remove_algorithms);
  ReadOptional(j, "remove_hyperparameter_values", f.remove_hyperparameter_values);
  ReadOptional(j, "thresholds_used", f.thresholds_used);
  j.at("decision").get_to(f.decision);
}

void to_json(Json& j, const EvalLogEntry& e) {
  j = {{"type", "evaluation"},
       {"generation", e.generation},
       {"canonical_key", e.workflow.canonical_key},
       {"fitness", e.record.fitness},
       {"eval_time", e.record.eval_time},
       {"classifier", e.record.classifier},
       {"cached", e.cached}};
  if (e.record.failed) j["failed"] = true;
}

void to_json(Json& j, const InteractionRecord& r) {
  j = {{"type", "interaction"},
       {"generation", r.generation},
       {"thresholds", r.thresholds},
       {"removed_algorithms", r.removed_algorithms},
       {"removed_hyperparameter_values", r.removed_hyperparameter_values},
       {"decision", r.decision},
       {"wall_time_spent_seconds", r.wall_time_spent_seconds}};
}

struct JsonlRunLog::File {
  std::ofstream out;
};

JsonlRunLog::JsonlRunLog(const std::string& path) : file_(std::make_unique<File>()) {
  file_->out.open(path, std::ios::trunc);
  if (!file_->out) throw InvalidArgument("cannot open run log '" + path + "'");
}

JsonlRunLog::~JsonlRunLog() = default;

void JsonlRunLog::OnEvaluation(const EvalLogEntry& entry) {
  file_->out << Json(entry).dump() << '\n';
}

void JsonlRunLog::OnInteraction(const InteractionRecord& record) {
  file_->out << Json(record).dump() << '\n';
  file_->out.flush();
}

}  // namespace engine
}  // namespace evoflow
