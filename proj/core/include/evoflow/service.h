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

// HTTP facade hosting interactive sessions: one engine actor per session,
// JSON over REST, logs persisted under a working directory.
//
// Working directory layout:
//   datasets/<name>.csv       datasets referenced by POST /sessions
//   grammars/<name>.bnf       optional grammars; "default" is built in
//   sessions/<id>/run.jsonl, sessions/<id>/interactions.jsonl

#ifndef EVOFLOW_SERVICE_H_
#define EVOFLOW_SERVICE_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "evoflow/evaluation.h"
#include "evoflow/experiment.h"
#include "evoflow/json.h"

namespace evoflow::service {

struct ServiceOptions {
  std::filesystem::path workdir;
  // Measures wall_time_spent_seconds; steady clock when null.
  std::shared_ptr<evaluation::Clock> clock;
  // Evaluation clock per session; steady clock when null.
  experiment::ClockFactory eval_clock;
};

struct Response {
  int status = 200;
  Json body;
};

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Route handlers, callable without HTTP.
  Response CreateSession(const std::string& body);
  Response GetStatus(const std::string& id);
  // With t_acc and/or t_time present ("none" disables an axis), the snapshot
  // carries thresholds, partition and candidates.
  Response GetSnapshot(const std::string& id,
                       const std::map<std::string, std::string>& query = {});
  Response PostFeedback(const std::string& id, const std::string& body);
  Response GetResult(const std::string& id);
  Response GetTimeline(const std::string& id);

  // Binds and serves in a background thread; returns the bound port (an
  // ephemeral one when `port` is 0). Throws InvalidArgument if binding fails.
  int Start(const std::string& host, int port);
  // Blocks serving until Stop().
  void Serve(const std::string& host, int port);
  // Blocks until a started server stops.
  void Wait();
  // Asks the server to stop; Wait() or the destructor joins it.
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace evoflow::service

#endif  // EVOFLOW_SERVICE_H_
